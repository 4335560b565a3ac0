#include "fdb/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fdb/errors.hpp"

namespace fdb {

namespace {

void walk_paths(const FTree& tree,
                const std::function<void(const NodePath&, const FNode&)>& fn) {
  std::function<void(NodePath&, const FNode&)> rec = [&](NodePath& p,
                                                         const FNode& n) {
    fn(p, n);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      p.push_back(i);
      rec(p, n.children[i]);
      p.pop_back();
    }
  };
  NodePath p;
  for (std::size_t r = 0; r < tree.roots.size(); ++r) {
    p.assign(1, r);
    rec(p, tree.roots[r]);
  }
}

bool is_prefix(const NodePath& a, const NodePath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

/// Resolves a class id or qualified attribute to the id of the class
/// carrying it.
std::string condition_class(const FTree& tree, const std::string& name) {
  std::string hit;
  walk_paths(tree, [&](const NodePath&, const FNode& n) {
    for (const AttributeClass& c : n.classes) {
      if (c.id == name) hit = c.id;
      for (const Attribute& m : c.members)
        if (m.qualified() == name) hit = c.id;
    }
  });
  if (hit.empty()) throw SemanticError("unknown attribute " + name);
  return hit;
}

std::string uf_find(std::map<std::string, std::string>& parent,
                    const std::string& x) {
  std::string r = x;
  while (parent.at(r) != r) r = parent.at(r);
  std::string c = x;
  while (parent.at(c) != c) {
    std::string next = parent.at(c);
    parent[c] = r;
    c = next;
  }
  return r;
}

void uf_union(std::map<std::string, std::string>& parent, const std::string& a,
              const std::string& b) {
  std::string ra = uf_find(parent, a), rb = uf_find(parent, b);
  if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
}

/// Multiset of per-node class-id sets; two trees agree here exactly when
/// they group the same classes onto nodes.
std::vector<std::vector<std::string>> partition_sig(const FTree& tree) {
  std::vector<std::vector<std::string>> sig;
  walk_paths(tree, [&](const NodePath&, const FNode& n) {
    std::vector<std::string> ids = class_ids(n);
    std::sort(ids.begin(), ids.end());
    sig.push_back(std::move(ids));
  });
  std::sort(sig.begin(), sig.end());
  return sig;
}

void check_not_constant(const FTree& tree, const std::string& classId) {
  std::optional<NodePath> p = find_class(tree, classId);
  if (p && node_at(tree, *p).constant)
    throw SemanticError("cannot join on the constant class " + classId);
}

void finalize_costs(FPlan& plan, const PlanOrder& order) {
  plan.boundCost = Rational(0);
  plan.estimateCost = 0.0;
  if (plan.trees.empty()) {
    plan.finalCost = Rational(0);
    return;
  }
  for (const FTree& t : plan.trees)
    plan.boundCost = std::max(plan.boundCost, s_cost(t));
  plan.finalCost = s_cost(plan.trees.back());
  if (order.stats)
    for (std::size_t i = 0; i + 1 < plan.trees.size(); ++i)
      plan.estimateCost +=
          size_estimate(plan.trees[i], *order.stats, order.aliases) +
          size_estimate(plan.trees[i + 1], *order.stats, order.aliases);
}

}  // namespace

bool operator<(const PlanCost& a, const PlanCost& b) {
  if (a.mode == PlanOrder::Mode::Bound)
    return std::tie(a.sMax, a.sFinal) < std::tie(b.sMax, b.sFinal);
  return std::tie(a.eSum, a.eFinal) < std::tie(b.eSum, b.eFinal);
}

bool operator==(const PlanCost& a, const PlanCost& b) {
  if (a.mode == PlanOrder::Mode::Bound)
    return std::tie(a.sMax, a.sFinal) == std::tie(b.sMax, b.sFinal);
  return std::tie(a.eSum, a.eFinal) == std::tie(b.eSum, b.eFinal);
}

PlanCost plan_cost(const FPlan& plan, const PlanOrder& order) {
  if (order.mode == PlanOrder::Mode::Estimate && !order.stats)
    throw SemanticError("estimate plan order requires relation statistics");
  PlanCost c;
  c.mode = order.mode;
  if (plan.trees.empty()) return c;
  for (const FTree& t : plan.trees) c.sMax = std::max(c.sMax, s_cost(t));
  c.sFinal = s_cost(plan.trees.back());
  if (order.stats) {
    for (std::size_t i = 0; i + 1 < plan.trees.size(); ++i)
      c.eSum += size_estimate(plan.trees[i], *order.stats, order.aliases) +
                size_estimate(plan.trees[i + 1], *order.stats, order.aliases);
    c.eFinal = size_estimate(plan.trees.back(), *order.stats, order.aliases);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Optimal f-tree search

namespace {

/// Splits `mask` into dependency-connected components: two classes are
/// connected when one dependency set covers both.
std::vector<std::uint64_t> split_components(
    std::uint64_t mask, const std::vector<std::uint64_t>& depBits) {
  std::vector<std::uint64_t> comps;
  std::uint64_t left = mask;
  while (left) {
    std::uint64_t comp = left & (~left + 1);
    bool grown = true;
    while (grown) {
      grown = false;
      for (std::uint64_t db : depBits)
        if ((db & comp) && (db & mask & ~comp)) {
          comp |= db & mask;
          grown = true;
        }
    }
    comps.push_back(comp);
    left &= ~comp;
  }
  return comps;
}

struct TreeSearch {
  std::vector<AttributeClass> sigClasses;  // index = bit
  std::vector<std::uint64_t> sigMask;      // covering deps per class
  std::vector<std::uint64_t> depBits;      // covered classes per dep
  std::size_t ndeps = 0;
  CostMode mode = CostMode::Fractional;

  struct Sol {
    Rational cost;
    long long weight = 0;  // sum of class depths; prefers bushy shapes
    FNode root;
    std::string repr;
  };
  std::map<std::pair<std::uint64_t, std::set<std::uint64_t>>, Sol> memo;
  std::map<std::set<std::uint64_t>, Rational> lpCache;

  Rational path_cost(const std::set<std::uint64_t>& fam) {
    auto it = lpCache.find(fam);
    if (it != lpCache.end()) return it->second;
    return lpCache[fam] =
               detail::cover_cost({fam.begin(), fam.end()}, ndeps, mode);
  }

  static std::string node_repr(const FNode& n) {
    std::string s = "(" + n.classes.front().id;
    for (const FNode& c : n.children) s += node_repr(c);
    return s + ")";
  }

  /// Cheapest normalised tree over the connected class set `comp`, given
  /// the covering constraints already fixed by ancestors.
  const Sol& solve(std::uint64_t comp, const std::set<std::uint64_t>& fam) {
    auto key = std::make_pair(comp, fam);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    std::optional<Sol> best;
    for (std::uint64_t m = comp; m;) {
      std::uint64_t bit = m & (~m + 1);
      m &= ~bit;
      std::size_t r = static_cast<std::size_t>(std::countr_zero(bit));
      std::set<std::uint64_t> fam2 = fam;
      fam2.insert(sigMask[r]);

      Sol cand;
      cand.root.classes = {sigClasses[r]};
      cand.weight = 1;
      std::uint64_t rest = comp & ~bit;
      if (rest == 0) {
        cand.cost = path_cost(fam2);
      } else {
        cand.cost = Rational(0);
        for (std::uint64_t sub : split_components(rest, depBits)) {
          const Sol& s = solve(sub, fam2);
          cand.cost = std::max(cand.cost, s.cost);
          // Nesting under r pushes the whole subtree one level down.
          cand.weight += s.weight + std::popcount(sub);
          cand.root.children.push_back(s.root);
        }
        std::sort(cand.root.children.begin(), cand.root.children.end(),
                  [](const FNode& a, const FNode& b) {
                    return node_repr(a) < node_repr(b);
                  });
      }
      cand.repr = node_repr(cand.root);
      if (!best || std::tie(cand.cost, cand.weight, cand.repr) <
                       std::tie(best->cost, best->weight, best->repr))
        best = std::move(cand);
    }
    return memo[key] = std::move(*best);
  }
};

}  // namespace

FTree optimal_ftree(const Database& db, const Query& q, CostMode mode) {
  q.bind(db);
  std::vector<AttributeClass> classes = equivalence_classes(q);
  std::vector<DependencySet> deps = dependency_sets(q, classes);
  if (deps.size() > 64) throw BudgetError("f-tree search over more than 64 relations");

  std::map<std::string, std::uint64_t> maskOf;
  for (std::size_t d = 0; d < deps.size(); ++d)
    for (const std::string& id : deps[d].classes)
      maskOf[id] |= std::uint64_t(1) << d;

  // Classes private to one atom are interchangeable: only a representative
  // takes part in the search, the rest come back as a chain under it.
  std::map<std::uint64_t, std::vector<const AttributeClass*>> privates;
  TreeSearch ts;
  ts.ndeps = deps.size();
  ts.mode = mode;
  std::map<std::string, std::vector<const AttributeClass*>> chains;
  for (const AttributeClass& c : classes) {
    std::uint64_t m = maskOf.at(c.id);
    if (m == 0) throw SemanticError("class " + c.id + " belongs to no relation");
    if (std::popcount(m) == 1) {
      auto& grp = privates[m];
      grp.push_back(&c);
      if (grp.size() > 1) continue;  // only the representative enters
      chains[c.id];                  // placeholder, filled below
    }
    ts.sigClasses.push_back(c);
    ts.sigMask.push_back(m);
  }
  for (const auto& [m, grp] : privates)
    if (grp.size() > 1)
      chains[grp.front()->id] = grp;
  if (ts.sigClasses.size() > 64)
    throw BudgetError("f-tree search over more than 64 classes");

  ts.depBits.assign(deps.size(), 0);
  for (std::size_t i = 0; i < ts.sigClasses.size(); ++i)
    for (std::size_t d = 0; d < deps.size(); ++d)
      if (ts.sigMask[i] & (std::uint64_t(1) << d))
        ts.depBits[d] |= std::uint64_t(1) << i;

  std::uint64_t all = ts.sigClasses.size() == 64
                          ? ~std::uint64_t(0)
                          : (std::uint64_t(1) << ts.sigClasses.size()) - 1;

  std::function<FNode(FNode)> expand = [&](FNode n) {
    for (FNode& c : n.children) c = expand(std::move(c));
    auto it = chains.find(n.classes.front().id);
    if (n.classes.size() == 1 && it != chains.end() && it->second.size() > 1) {
      std::vector<FNode> tail = std::move(n.children);
      n.children.clear();
      for (std::size_t i = it->second.size(); i-- > 1;) {
        FNode link;
        link.classes = {*it->second[i]};
        link.children = std::move(tail);
        tail.clear();
        tail.push_back(std::move(link));
      }
      n.children = std::move(tail);
    }
    return n;
  };

  FTree out;
  out.deps = deps;
  for (std::uint64_t comp : split_components(all, ts.depBits))
    out.roots.push_back(expand(ts.solve(comp, {}).root));
  validate_ftree(out);
  return out;
}

// ---------------------------------------------------------------------------
// Plan search

namespace {

struct Move {
  OpKind kind = OpKind::Swap;
  std::string a, b;
};

struct NodeRef {
  NodePath path;
  std::string first;  // first class id, the node's stable handle
  std::string block;
  bool constant = false;
};

std::vector<NodeRef> node_refs(const FTree& tree,
                               std::map<std::string, std::string>& uf) {
  std::vector<NodeRef> refs;
  walk_paths(tree, [&](const NodePath& p, const FNode& n) {
    refs.push_back({p, n.classes.front().id,
                    uf_find(uf, n.classes.front().id), n.constant});
  });
  return refs;
}

/// Legal single steps from `tree`: every swap, plus merges and absorbs of
/// node pairs the conditions force together.
std::vector<std::pair<Move, FTree>> neighbours(
    const FTree& tree, std::map<std::string, std::string>& uf) {
  std::vector<std::pair<Move, FTree>> out;
  std::vector<NodeRef> refs = node_refs(tree, uf);
  for (const NodeRef& r : refs) {
    if (r.path.size() < 2) continue;
    NodePath pp(r.path.begin(), r.path.end() - 1);
    const std::string& parent = node_at(tree, pp).classes.front().id;
    out.push_back({{OpKind::Swap, parent, r.first},
                   tree_swap(tree, parent, r.first)});
  }
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      const NodeRef& a = refs[i];
      const NodeRef& b = refs[j];
      if (a.block != b.block || a.constant || b.constant) continue;
      if (a.path.size() == b.path.size() &&
          std::equal(a.path.begin(), a.path.end() - 1, b.path.begin()))
        out.push_back({{OpKind::Merge, a.first, b.first},
                       tree_merge(tree, a.first, b.first)});
      else if (is_prefix(a.path, b.path))
        out.push_back({{OpKind::Absorb, a.first, b.first},
                       tree_absorb(tree, a.first, b.first)});
      else if (is_prefix(b.path, a.path))
        out.push_back({{OpKind::Absorb, b.first, a.first},
                       tree_absorb(tree, b.first, a.first)});
    }
  return out;
}

/// Union-find over class ids: classes sharing a node travel together, and
/// each condition joins the classes it equates.  Returns the target
/// partition the final tree must realise.
std::vector<std::vector<std::string>> target_partition(
    const FTree& in, const std::vector<JoinCondition>& conditions,
    std::map<std::string, std::string>& uf) {
  walk_paths(in, [&](const NodePath&, const FNode& n) {
    for (const AttributeClass& c : n.classes) uf.emplace(c.id, c.id);
    for (std::size_t i = 1; i < n.classes.size(); ++i)
      uf_union(uf, n.classes.front().id, n.classes[i].id);
  });
  for (const JoinCondition& jc : conditions) {
    std::string ca = condition_class(in, jc.first);
    std::string cb = condition_class(in, jc.second);
    check_not_constant(in, ca);
    check_not_constant(in, cb);
    uf_union(uf, ca, cb);
  }
  std::map<std::string, std::vector<std::string>> blocks;
  for (const auto& [id, _] : uf) blocks[uf_find(uf, id)].push_back(id);
  std::vector<std::vector<std::string>> target;
  for (auto& [_, ids] : blocks) {
    std::sort(ids.begin(), ids.end());
    target.push_back(ids);
  }
  std::sort(target.begin(), target.end());
  return target;
}

}  // namespace

FPlan exhaustive_plan(const FTree& in,
                      const std::vector<JoinCondition>& conditions,
                      const PlanOrder& order, const PlanSearchLimits& limits) {
  validate_ftree(in);
  const bool bound = order.mode == PlanOrder::Mode::Bound;
  if (!bound && !order.stats)
    throw SemanticError("estimate plan order requires relation statistics");

  std::map<std::string, std::string> uf;
  const std::vector<std::vector<std::string>> target =
      target_partition(in, conditions, uf);
  auto is_goal = [&](const FTree& t) { return partition_sig(t) == target; };

  using Dist = std::pair<Rational, double>;  // bound: (max s, 0); estimate: (0, sum)
  struct State {
    FTree tree;
    Rational s;
    double est = 0.0;
    Dist dist;
    std::size_t depth = 0;  // steps on the recorded path, tie-break only
    std::string pred;
    Move via;
    bool hasPred = false;
  };
  auto estimate = [&](const FTree& t) {
    return order.stats ? size_estimate(t, *order.stats, order.aliases) : 0.0;
  };

  std::map<std::string, State> st;
  std::set<std::pair<Dist, std::string>> pq;
  const std::string canon0 = canonical_form(in);
  {
    State s0;
    s0.tree = in;
    s0.s = s_cost(in);
    s0.est = bound ? 0.0 : estimate(in);
    s0.dist = bound ? Dist{s0.s, 0.0} : Dist{Rational(0), 0.0};
    pq.insert({s0.dist, canon0});
    st.emplace(canon0, std::move(s0));
  }

  bool have = false;
  Dist dstar;
  std::vector<std::string> goals;
  while (!pq.empty()) {
    auto [d, c] = *pq.begin();
    if (have && dstar < d) break;
    pq.erase(pq.begin());
    State& u = st.at(c);
    if (is_goal(u.tree)) {
      if (!have) {
        have = true;
        dstar = d;
      }
      goals.push_back(c);
    }
    for (auto& [mv, nt] : neighbours(u.tree, uf)) {
      const std::string nc = canonical_form(nt);
      auto it = st.find(nc);
      const Rational ns = it != st.end() ? it->second.s : s_cost(nt);
      const double nest =
          bound ? 0.0 : (it != st.end() ? it->second.est : estimate(nt));
      const Dist nd = bound ? Dist{std::max(d.first, ns), 0.0}
                            : Dist{Rational(0), d.second + u.est + nest};
      if (have && dstar < nd) continue;
      if (it == st.end()) {
        if (st.size() >= limits.maxStates)
          throw BudgetError("plan search exceeded " +
                            std::to_string(limits.maxStates) + " states");
        State sv;
        sv.tree = std::move(nt);
        sv.s = ns;
        sv.est = nest;
        sv.dist = nd;
        sv.depth = u.depth + 1;
        sv.pred = c;
        sv.via = mv;
        sv.hasPred = true;
        pq.insert({nd, nc});
        st.emplace(nc, std::move(sv));
      } else if (nd < it->second.dist) {
        pq.erase({it->second.dist, nc});
        it->second.dist = nd;
        it->second.depth = u.depth + 1;
        it->second.pred = c;
        it->second.via = mv;
        it->second.hasPred = true;
        it->second.tree = std::move(nt);  // keep tree consistent with the edge
        pq.insert({nd, nc});
      }
    }
  }
  if (!have)
    throw SemanticError("no operator sequence unifies the requested classes");

  // Among goals at the best distance: cheapest final tree, then fewest
  // steps (so an already satisfied input stays untouched), then canon.
  std::string best;
  for (const std::string& g : goals) {
    if (best.empty()) {
      best = g;
      continue;
    }
    const State& a = st.at(g);
    const State& b = st.at(best);
    bool better = bound
                      ? std::tie(a.s, a.depth, g) < std::tie(b.s, b.depth, best)
                      : std::tie(a.est, a.depth, g) <
                            std::tie(b.est, b.depth, best);
    if (better) best = g;
  }

  std::vector<std::string> chain;
  for (std::string c = best;;) {
    chain.push_back(c);
    if (!st.at(c).hasPred) break;
    c = st.at(c).pred;
  }
  std::reverse(chain.begin(), chain.end());

  FPlan plan;
  for (const std::string& c : chain) plan.trees.push_back(st.at(c).tree);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const Move& mv = st.at(chain[i]).via;
    plan.steps.push_back(
        {mv.kind, {mv.a, mv.b}, plan.trees[i - 1], plan.trees[i]});
  }
  finalize_costs(plan, order);
  return plan;
}

// ---------------------------------------------------------------------------
// Greedy plan

namespace {

struct Chain {
  std::vector<Move> moves;
  std::vector<FTree> trees;  // one per move
};

/// Raises cUp's node by repeated swaps with its parent until it is a
/// proper ancestor of cDown's node, then absorbs.  Fails if cUp reaches a
/// root of a different tree.
std::optional<Chain> scenario_absorb(const FTree& t0, const std::string& cUp,
                                     const std::string& cDown) {
  Chain ch;
  FTree t = t0;
  for (;;) {
    NodePath pa = *find_class(t, cUp);
    NodePath pb = *find_class(t, cDown);
    if (pa == pb) return std::nullopt;
    if (is_prefix(pa, pb)) break;
    if (pa.size() == 1) return std::nullopt;
    NodePath pp(pa.begin(), pa.end() - 1);
    std::string parent = node_at(t, pp).classes.front().id;
    t = tree_swap(t, parent, cUp);
    ch.moves.push_back({OpKind::Swap, parent, cUp});
    ch.trees.push_back(t);
  }
  t = tree_absorb(t, cUp, cDown);
  ch.moves.push_back({OpKind::Absorb, cUp, cDown});
  ch.trees.push_back(t);
  return ch;
}

/// Raises the deeper of the two nodes until they share a parent, then
/// merges.  Fails if the nodes are nested.
std::optional<Chain> scenario_merge(const FTree& t0, const std::string& c1,
                                    const std::string& c2) {
  Chain ch;
  FTree t = t0;
  for (;;) {
    NodePath pa = *find_class(t, c1);
    NodePath pb = *find_class(t, c2);
    if (is_prefix(pa, pb) || is_prefix(pb, pa)) return std::nullopt;
    if (pa.size() == pb.size() &&
        std::equal(pa.begin(), pa.end() - 1, pb.begin()))
      break;
    const std::string& up = pa.size() >= pb.size() ? c1 : c2;
    NodePath deep = pa.size() >= pb.size() ? pa : pb;
    NodePath pp(deep.begin(), deep.end() - 1);
    std::string parent = node_at(t, pp).classes.front().id;
    t = tree_swap(t, parent, up);
    ch.moves.push_back({OpKind::Swap, parent, up});
    ch.trees.push_back(t);
  }
  t = tree_merge(t, c1, c2);
  ch.moves.push_back({OpKind::Merge, c1, c2});
  ch.trees.push_back(t);
  return ch;
}

}  // namespace

FPlan greedy_plan(const FTree& in, const std::vector<JoinCondition>& conditions,
                  const PlanOrder& order) {
  validate_ftree(in);
  const bool bound = order.mode == PlanOrder::Mode::Bound;
  if (!bound && !order.stats)
    throw SemanticError("estimate plan order requires relation statistics");

  std::vector<std::pair<std::string, std::string>> conds;
  for (const JoinCondition& jc : conditions) {
    std::string ca = condition_class(in, jc.first);
    std::string cb = condition_class(in, jc.second);
    check_not_constant(in, ca);
    check_not_constant(in, cb);
    if (ca != cb) conds.emplace_back(ca, cb);
  }

  FPlan plan;
  plan.trees.push_back(in);
  FTree cur = in;
  std::vector<bool> done(conds.size(), false);

  auto chain_cost_bound = [](const Chain& ch) {
    Rational m(0);
    for (const FTree& t : ch.trees) m = std::max(m, s_cost(t));
    return m;
  };
  auto chain_cost_est = [&](const Chain& ch, const FTree& from) {
    double sum = 0.0;
    const FTree* prev = &from;
    for (const FTree& t : ch.trees) {
      sum += size_estimate(*prev, *order.stats, order.aliases) +
             size_estimate(t, *order.stats, order.aliases);
      prev = &t;
    }
    return sum;
  };

  for (;;) {
    for (std::size_t i = 0; i < conds.size(); ++i)
      if (!done[i] &&
          *find_class(cur, conds[i].first) == *find_class(cur, conds[i].second))
        done[i] = true;
    if (std::find(done.begin(), done.end(), false) == done.end()) break;

    std::optional<Chain> best;
    std::tuple<Rational, double, std::size_t, int> bestKey;
    for (std::size_t i = 0; i < conds.size(); ++i) {
      if (done[i]) continue;
      const auto& [c1, c2] = conds[i];
      std::optional<Chain> cands[3] = {scenario_absorb(cur, c1, c2),
                                       scenario_absorb(cur, c2, c1),
                                       scenario_merge(cur, c1, c2)};
      for (int s = 0; s < 3; ++s) {
        if (!cands[s]) continue;
        std::tuple<Rational, double, std::size_t, int> key =
            bound ? std::tuple{chain_cost_bound(*cands[s]), 0.0, i, s}
                  : std::tuple{Rational(0), chain_cost_est(*cands[s], cur), i,
                               s};
        if (!best || key < bestKey) {
          best = std::move(cands[s]);
          bestKey = key;
        }
      }
    }
    if (!best)
      throw SemanticError(
          "greedy search cannot unify the requested classes");
    for (std::size_t k = 0; k < best->moves.size(); ++k) {
      const Move& mv = best->moves[k];
      plan.steps.push_back({mv.kind, {mv.a, mv.b},
                            k == 0 ? cur : best->trees[k - 1],
                            best->trees[k]});
      plan.trees.push_back(best->trees[k]);
    }
    cur = best->trees.back();
  }
  finalize_costs(plan, order);
  return plan;
}

// ---------------------------------------------------------------------------
// Replay

FRep apply_step(const FRep& in, const OperatorApplication& step) {
  switch (step.kind) {
    case OpKind::Pushup:
      return op_pushup(in, step.args.at(0));
    case OpKind::Normalise:
      return op_normalise(in);
    case OpKind::Swap:
      return op_swap(in, step.args.at(0), step.args.at(1));
    case OpKind::Merge:
      return op_merge(in, step.args.at(0), step.args.at(1));
    case OpKind::Absorb:
      return op_absorb(in, step.args.at(0), step.args.at(1));
    case OpKind::SelectConst:
      return op_select_const(in, step.args.at(0),
                             parse_cmp_op(step.args.at(1)),
                             Value::parse(step.args.at(2)));
    case OpKind::Project:
      return op_project(in, step.args);
    case OpKind::Product:
      break;
  }
  throw SemanticError("step " + to_string(step.kind) +
                      " cannot be replayed on a single representation");
}

FRep apply_plan(const FRep& in, const FPlan& plan) {
  FRep cur = in;
  for (const OperatorApplication& step : plan.steps) cur = apply_step(cur, step);
  return cur;
}

}  // namespace fdb
