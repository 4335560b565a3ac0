#pragma once

#include <vector>

#include "fdb/rational.hpp"

namespace fdb {

struct LpResult {
  Rational objective;
  std::vector<Rational> x;
};

/// Solves  minimise c·x  subject to  A·x >= b, x >= 0  in exact rational
/// arithmetic (two-phase tableau simplex, Bland's rule).
///
/// Throws std::domain_error if infeasible and std::runtime_error if
/// unbounded; the fractional edge cover instances solved here are always
/// feasible and bounded.
LpResult lp_minimize(const std::vector<std::vector<Rational>>& A,
                     const std::vector<Rational>& b,
                     const std::vector<Rational>& c);

}  // namespace fdb
