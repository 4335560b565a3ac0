#include "fdb/rational.hpp"

#include <limits>

namespace fdb {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational Rational::make(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational: division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  constexpr __int128 lo = std::numeric_limits<int64_t>::min();
  constexpr __int128 hi = std::numeric_limits<int64_t>::max();
  if (n < lo || n > hi || d > hi)
    throw std::overflow_error("rational: value out of int64 range");
  Rational r;
  r.num_ = static_cast<int64_t>(n);
  r.den_ = static_cast<int64_t>(d);
  return r;
}

Rational::Rational(int64_t n, int64_t d) { *this = make(n, d); }

Rational Rational::operator+(const Rational& r) const {
  return make(static_cast<__int128>(num_) * r.den_ +
                  static_cast<__int128>(r.num_) * den_,
              static_cast<__int128>(den_) * r.den_);
}

Rational Rational::operator-(const Rational& r) const {
  return make(static_cast<__int128>(num_) * r.den_ -
                  static_cast<__int128>(r.num_) * den_,
              static_cast<__int128>(den_) * r.den_);
}

Rational Rational::operator*(const Rational& r) const {
  return make(static_cast<__int128>(num_) * r.num_,
              static_cast<__int128>(den_) * r.den_);
}

Rational Rational::operator/(const Rational& r) const {
  return make(static_cast<__int128>(num_) * r.den_,
              static_cast<__int128>(den_) * r.num_);
}

std::strong_ordering Rational::operator<=>(const Rational& r) const {
  __int128 lhs = static_cast<__int128>(num_) * r.den_;
  __int128 rhs = static_cast<__int128>(r.num_) * den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace fdb
