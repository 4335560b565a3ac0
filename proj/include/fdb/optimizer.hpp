#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fdb/catalog.hpp"
#include "fdb/frep.hpp"
#include "fdb/ftree.hpp"
#include "fdb/operators.hpp"
#include "fdb/rational.hpp"

namespace fdb {

/// How plan search ranks candidates.  Bound mode minimises the worst
/// s-cost along the plan, then the s-cost of the final tree; it needs no
/// statistics.  Estimate mode minimises the sum over steps of the
/// estimated sizes of input and output representation and breaks ties by
/// the final tree's estimate; it requires `stats`.
struct PlanOrder {
  enum class Mode { Bound, Estimate };

  Mode mode = Mode::Bound;
  const Catalogue* stats = nullptr;
  std::map<std::string, std::string> aliases;  // atom -> stored relation
};

/// Sequence of operator applications turning one f-tree into another.
/// `trees` is the full chain T_0..T_k; steps[i] maps trees[i] to
/// trees[i+1], so steps.size() + 1 == trees.size().
struct FPlan {
  std::vector<OperatorApplication> steps;
  std::vector<FTree> trees;
  Rational boundCost;         // max over the chain of s(T_i)
  Rational finalCost;         // s(T_k)
  double estimateCost = 0.0;  // sum over steps of est(in) + est(out); 0 without stats
};

/// Comparable plan cost.  Ordering is lexicographic within one mode:
/// bound compares (sMax, sFinal), estimate compares (eSum, eFinal).
struct PlanCost {
  PlanOrder::Mode mode = PlanOrder::Mode::Bound;
  Rational sMax;
  Rational sFinal;
  double eSum = 0.0;
  double eFinal = 0.0;

  friend bool operator<(const PlanCost& a, const PlanCost& b);
  friend bool operator==(const PlanCost& a, const PlanCost& b);
};

PlanCost plan_cost(const FPlan& plan, const PlanOrder& order);

struct PlanSearchLimits {
  std::size_t maxStates = 1'000'000;  // distinct trees before BudgetError
};

/// Equality to enforce between two classes of the input tree.  Each side
/// may be a class id or a qualified attribute carried by the tree.
using JoinCondition = std::pair<std::string, std::string>;

/// F-tree of minimal s-cost for the query, over its equivalence classes.
/// Enumerates every normalised shape: each tree of the forest covers one
/// dependency-connected component of the classes, and for a fixed root
/// the child subtrees are exactly the components of the remainder.
/// States are memoised on (component, set of ancestor constraint masks);
/// attributes private to one atom are collapsed to a representative
/// during the search and expanded into a chain afterwards.  Ties are
/// broken towards the smallest serialised subtree, so the result is
/// deterministic.
FTree optimal_ftree(const Database& db, const Query& q,
                    CostMode mode = CostMode::Fractional);

/// Cheapest plan unifying the given classes, by Dijkstra over the graph
/// of trees reachable through swaps plus merges/absorbs of nodes the
/// conditions require to end up together.  Bound mode runs a bottleneck
/// search (max s-cost along the path), keeps every goal at that
/// distance, and picks the one with the smallest final s-cost; estimate
/// mode is additive over step estimates with ties on the final
/// estimate.  States are identified by canonical form; exceeding
/// `limits.maxStates` raises BudgetError.  No conditions yields the
/// empty plan.
FPlan exhaustive_plan(const FTree& in,
                      const std::vector<JoinCondition>& conditions,
                      const PlanOrder& order = {},
                      const PlanSearchLimits& limits = {});

/// Greedy heuristic: per outstanding condition cost three restructuring
/// scenarios (raise one node until it is an ancestor of the other and
/// absorb, in either direction, or raise both until they are siblings
/// and merge), then apply the cheapest condition's cheapest scenario and
/// repeat.  Conditions already satisfied en route are dropped for free.
FPlan greedy_plan(const FTree& in,
                  const std::vector<JoinCondition>& conditions,
                  const PlanOrder& order = {});

/// Replays one recorded step on a representation whose tree matches the
/// step's input tree.
FRep apply_step(const FRep& in, const OperatorApplication& step);

/// Replays all steps of a plan in order.
FRep apply_plan(const FRep& in, const FPlan& plan);

}  // namespace fdb
