#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fdb {

/// Exact rational arithmetic on int64 numerator/denominator.
///
/// The cost LPs solved here are tiny (0/1 coefficients, tens of variables),
/// so reduced fractions stay far below the int64 range; intermediates use
/// 128-bit arithmetic and overflow after reduction throws.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(int64_t n) : num_(n), den_(1) {}
  Rational(int64_t n, int64_t d);

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }

  Rational operator+(const Rational& r) const;
  Rational operator-(const Rational& r) const;
  Rational operator*(const Rational& r) const;
  Rational operator/(const Rational& r) const;
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& r) { return *this = *this + r; }
  Rational& operator-=(const Rational& r) { return *this = *this - r; }
  Rational& operator*=(const Rational& r) { return *this = *this * r; }
  Rational& operator/=(const Rational& r) { return *this = *this / r; }

  std::strong_ordering operator<=>(const Rational& r) const;
  bool operator==(const Rational& r) const {
    return num_ == r.num_ && den_ == r.den_;
  }

  bool is_integer() const { return den_ == 1; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "3" for integers, "3/2" otherwise.
  std::string to_string() const;

 private:
  static Rational make(__int128 n, __int128 d);

  int64_t num_;
  int64_t den_;  // always > 0
};

}  // namespace fdb
