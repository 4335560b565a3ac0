#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fdb {

/// A single data value: a 64-bit integer or an interned string.
/// Columns are homogeneous, so comparisons between the two kinds never
/// happen on real data; the ordering still defines integers < strings so
/// that Value works as a map key.
class Value {
 public:
  Value() : num_(0), str_(nullptr) {}

  static Value integer(int64_t v) { return Value(v, nullptr); }

  /// Interns `s` in the global pool and returns a string value.
  static Value string(std::string_view s);

  bool is_int() const { return str_ == nullptr; }
  bool is_string() const { return str_ != nullptr; }

  int64_t as_int() const { return num_; }
  const std::string& as_string() const { return *str_; }

  /// Integers order numerically, strings bytewise lexicographically.
  std::strong_ordering operator<=>(const Value& other) const {
    if (is_int() != other.is_int())
      return is_int() ? std::strong_ordering::less
                      : std::strong_ordering::greater;
    if (is_int()) return num_ <=> other.num_;
    if (str_ == other.str_) return std::strong_ordering::equal;
    int c = str_->compare(*other.str_);
    return c <=> 0;
  }
  bool operator==(const Value& other) const {
    return (*this <=> other) == std::strong_ordering::equal;
  }

  /// Unquoted text form; `parse` is its inverse for canonical inputs.
  std::string to_string() const;

  /// Strict integer syntax: optional '-', digits, no leading zeros
  /// (so "01" stays a string and round-trips bytewise).
  static bool is_integer_literal(std::string_view s);

  /// Parses per the strict integer rule, falling back to interning.
  static Value parse(std::string_view s);

 private:
  Value(int64_t n, const std::string* s) : num_(n), str_(s) {}

  int64_t num_;
  const std::string* str_;
};

}  // namespace fdb
