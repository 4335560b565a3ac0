#include "fdb/lp.hpp"

#include <cstddef>
#include <stdexcept>

namespace fdb {
namespace {

// Dense tableau in exact rationals.  Columns are [structural | surplus |
// artificial | rhs]; basis_[i] holds the variable occupying row i.
class Tableau {
 public:
  Tableau(const std::vector<std::vector<Rational>>& A,
          const std::vector<Rational>& b)
      : m_(A.size()), n_(A.empty() ? 0 : A[0].size()) {
    rows_.assign(m_, std::vector<Rational>(n_ + 2 * m_ + 1));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      // A·x - s + a = b with b >= 0; rows with negative rhs are flipped
      // (turning >= into <=, hence surplus sign +1).
      const bool flip = b[i] < Rational(0);
      const Rational sign = flip ? Rational(-1) : Rational(1);
      for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = sign * A[i][j];
      rows_[i][n_ + i] = flip ? Rational(1) : Rational(-1);
      rows_[i][n_ + m_ + i] = Rational(1);
      rows_[i].back() = sign * b[i];
      basis_[i] = n_ + m_ + i;
    }
  }

  // Runs simplex for the given per-variable costs.  Columns j with
  // allowed(j) == false are never entered.
  template <typename Cost, typename Allowed>
  void solve(Cost cost, Allowed allowed) {
    const std::size_t cols = n_ + 2 * m_;
    for (;;) {
      // Bland: entering variable = lowest index with negative reduced cost.
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allowed(j)) continue;
        Rational rc = cost(j);
        for (std::size_t i = 0; i < m_; ++i)
          rc -= cost(basis_[i]) * rows_[i][j];
        if (rc < Rational(0)) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return;  // optimal

      // Ratio test; ties broken by lowest basis variable index (Bland).
      std::size_t leave = m_;
      Rational best(0);
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(rows_[i][enter] > Rational(0))) continue;
        Rational ratio = rows_[i].back() / rows_[i][enter];
        if (leave == m_ || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) throw std::runtime_error("lp: unbounded");
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const Rational inv = Rational(1) / rows_[row][col];
    for (Rational& v : rows_[row]) v *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row || rows_[i][col] == Rational(0)) continue;
      const Rational f = rows_[i][col];
      for (std::size_t j = 0; j < rows_[i].size(); ++j)
        rows_[i][j] -= f * rows_[row][j];
    }
    basis_[row] = col;
  }

  std::size_t m_, n_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult lp_minimize(const std::vector<std::vector<Rational>>& A,
                     const std::vector<Rational>& b,
                     const std::vector<Rational>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  if (b.size() != m) throw std::invalid_argument("lp: |b| != rows of A");
  for (const auto& row : A)
    if (row.size() != n) throw std::invalid_argument("lp: ragged A");

  if (m == 0) return {Rational(0), std::vector<Rational>(n, Rational(0))};

  Tableau t(A, b);
  const std::size_t art0 = n + m;

  // Phase 1: minimise the sum of artificials.
  t.solve([&](std::size_t j) { return j >= art0 ? Rational(1) : Rational(0); },
          [](std::size_t) { return true; });
  Rational infeas(0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis_[i] >= art0) infeas += t.rows_[i].back();
  if (infeas != Rational(0)) throw std::domain_error("lp: infeasible");

  // Drive zero-level artificials out of the basis; rows with no usable
  // pivot column are redundant constraints and can stay as they are.
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis_[i] < art0) continue;
    for (std::size_t j = 0; j < art0; ++j) {
      if (t.rows_[i][j] != Rational(0)) {
        t.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2: original objective, artificial columns locked out.
  t.solve([&](std::size_t j) { return j < n ? c[j] : Rational(0); },
          [&](std::size_t j) { return j < art0; });

  LpResult res{Rational(0), std::vector<Rational>(n, Rational(0))};
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis_[i] < n) res.x[t.basis_[i]] = t.rows_[i].back();
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace fdb
