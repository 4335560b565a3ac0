#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace fdb {

/// Malformed input text (relation files, queries, trees, reps, grids).
/// CLI exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Well-formed input that refers to unknown or incompatible things.
/// CLI exit code 3.
class SemanticError : public std::runtime_error {
 public:
  explicit SemanticError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A configured resource limit was exceeded (search states, wall clock).
/// CLI exit code 4.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Cooperative wall-clock cutoff for long-running engine work.  Engines
/// call check() at loop boundaries; an expired deadline throws
/// BudgetError so callers can record a missing data point.
class Deadline {
 public:
  Deadline() = default;
  static Deadline in(std::chrono::milliseconds budget) {
    Deadline d;
    d.at_ = std::chrono::steady_clock::now() + budget;
    return d;
  }

  bool expired() const {
    return at_ && std::chrono::steady_clock::now() > *at_;
  }
  void check(const char* what) const {
    if (expired()) throw BudgetError(std::string("timeout during ") + what);
  }

 private:
  std::optional<std::chrono::steady_clock::time_point> at_;
};

}  // namespace fdb
