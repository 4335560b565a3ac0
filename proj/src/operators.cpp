#include "fdb/operators.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>

#include "fdb/errors.hpp"

namespace fdb {

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Pushup: return "pushup";
    case OpKind::Normalise: return "normalise";
    case OpKind::Swap: return "swap";
    case OpKind::Product: return "product";
    case OpKind::Merge: return "merge";
    case OpKind::Absorb: return "absorb";
    case OpKind::SelectConst: return "select";
    case OpKind::Project: return "project";
  }
  return "?";
}

namespace {

NodePath locate(const FTree& tree, const std::string& classId) {
  auto p = find_class(tree, classId);
  if (!p) throw SemanticError("no node carries class " + classId);
  return *p;
}

std::vector<FNode>& sibling_vec(FTree& tree, const NodePath& path) {
  if (path.size() == 1) return tree.roots;
  return node_at(tree, NodePath(path.begin(), path.end() - 1)).children;
}

/// Positional unpack of a forest expression into exactly n factors.
std::vector<FExprPtr> unpack(const FExprPtr& e, std::size_t n) {
  auto fs = child_factors(e);
  if (fs.size() != n)
    throw std::logic_error("representation does not match the tree's arity");
  return fs;
}

/// Positional pack: nullptr for an empty forest, Empty if any factor is
/// Empty.  Unlike product_of this never flattens or drops factors.
FExprPtr pack_forest(std::vector<FExprPtr> factors) {
  for (const auto& f : factors)
    if (f->kind == FKind::Empty) return FExpr::empty();
  if (factors.empty()) return nullptr;
  if (factors.size() == 1) return std::move(factors[0]);
  return FExpr::make_product(std::move(factors));
}

/// Rewrites the factor list of one sub-forest in every context.
using ForestFn = std::function<std::vector<FExprPtr>(std::vector<FExprPtr>)>;
using Memo = std::vector<std::map<const FExpr*, FExprPtr>>;

/// `fp[d:]` walks from this forest down to the rewritten one; at the end
/// fn transforms the whole factor list.  A group whose rewritten forest
/// is Empty is dropped; a union losing all groups becomes Empty, which
/// the enclosing level drops in turn.  Shared subexpressions rewrite
/// once per depth via the memo.
std::vector<FExprPtr> rewrite_factors(const std::vector<const FNode*>& nodes,
                                      std::vector<FExprPtr> factors,
                                      const NodePath& fp, std::size_t d,
                                      const ForestFn& fn, Memo& memo) {
  if (d == fp.size()) return fn(std::move(factors));
  std::size_t i = fp[d];
  const FNode& nd = *nodes.at(i);
  const FExprPtr& u = factors.at(i);
  auto& m = memo[d];
  if (auto it = m.find(u.get()); it != m.end()) {
    factors[i] = it->second;
    return factors;
  }
  std::vector<const FNode*> kids;
  kids.reserve(nd.children.size());
  for (const auto& c : nd.children) kids.push_back(&c);
  std::vector<std::pair<Value, FExprPtr>> outGroups;
  for (const auto& [v, child] : u->groups) {
    auto fs = unpack(child, nd.children.size());
    auto rewritten = rewrite_factors(kids, std::move(fs), fp, d + 1, fn, memo);
    FExprPtr packed = pack_forest(std::move(rewritten));
    if (packed && packed->kind == FKind::Empty) continue;
    outGroups.emplace_back(v, std::move(packed));
  }
  FExprPtr res = outGroups.empty()
                     ? FExpr::empty()
                     : FExpr::make_union(u->classCount, std::move(outGroups));
  m.emplace(u.get(), res);
  factors[i] = std::move(res);
  return factors;
}

/// Applies a forest rewrite from the top; an empty result forest packs
/// to Nullary, an Empty one stays Empty.
FExprPtr rewrite_root(const FTree& tree, const FExprPtr& root,
                      const NodePath& fp, const ForestFn& fn) {
  if (root->kind == FKind::Empty) return root;
  std::vector<const FNode*> nodes;
  nodes.reserve(tree.roots.size());
  for (const auto& r : tree.roots) nodes.push_back(&r);
  auto factors = tree.roots.empty() ? std::vector<FExprPtr>{}
                                    : unpack(root, tree.roots.size());
  Memo memo(fp.size());
  auto out = rewrite_factors(nodes, std::move(factors), fp, 0, fn, memo);
  FExprPtr packed = pack_forest(std::move(out));
  return packed ? packed : FExpr::nullary();
}

/// Splices the replacement factors for the node at `p` into its
/// enclosing forest, in every context.
FExprPtr rewrite_node(const FTree& tree, const FExprPtr& root, const NodePath& p,
                      const std::function<std::vector<FExprPtr>(const FExprPtr&)>& fn) {
  NodePath fp(p.begin(), p.end() - 1);
  std::size_t idx = p.back();
  return rewrite_root(tree, root, fp, [&](std::vector<FExprPtr> fs) {
    auto rep = fn(fs.at(idx));
    fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(idx));
    fs.insert(fs.begin() + static_cast<std::ptrdiff_t>(idx),
              std::make_move_iterator(rep.begin()),
              std::make_move_iterator(rep.end()));
    return fs;
  });
}

bool is_prefix(const NodePath& pre, const NodePath& path) {
  return pre.size() <= path.size() &&
         std::equal(pre.begin(), pre.end(), path.begin());
}

std::string min_class_id(const FNode& node) {
  std::string best = node.classes.at(0).id;
  for (const auto& c : node.classes) best = std::min(best, c.id);
  return best;
}

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

/// Resolves a qualified attribute or class id to the node carrying it.
NodePath resolve_attr(const FTree& tree, const std::string& attr) {
  std::optional<NodePath> hit;
  walk_paths(tree, [&](const NodePath& p, const FNode& n) {
    for (const auto& c : n.classes) {
      if (c.id == attr) hit = p;
      for (const auto& m : c.members)
        if (m.qualified() == attr) hit = p;
    }
  });
  if (!hit) throw SemanticError("unknown attribute " + attr);
  return *hit;
}

/// Removes the given classes from the dependency sets.  Sets that lose a
/// class are united into one set so that attributes linked transitively
/// through the removed node stay on one path; sources join with '+'.
std::vector<DependencySet> strip_dep_classes(
    const std::vector<DependencySet>& deps,
    const std::vector<std::string>& removed) {
  std::set<std::string> gone(removed.begin(), removed.end());
  std::vector<DependencySet> out;
  std::set<std::string> cls, srcs;
  bool touched = false;
  for (const auto& d : deps) {
    bool hit = std::any_of(d.classes.begin(), d.classes.end(),
                           [&](const std::string& c) { return gone.count(c); });
    if (!hit) {
      out.push_back(d);
      continue;
    }
    touched = true;
    srcs.insert(d.source);
    for (const auto& c : d.classes)
      if (!gone.count(c)) cls.insert(c);
  }
  if (touched && !cls.empty()) {
    DependencySet m;
    std::string src;
    for (const auto& s : srcs) src += (src.empty() ? "" : "+") + s;
    m.source = src;
    m.classes.assign(cls.begin(), cls.end());
    out.push_back(std::move(m));
  }
  return out;
}

FTree absorb_raw(const FTree& tree, const NodePath& pa, const NodePath& pb) {
  FTree out = tree;
  const FNode bCopy = node_at(tree, pb);
  auto& cls = node_at(out, pa).classes;
  cls.insert(cls.end(), bCopy.classes.begin(), bCopy.classes.end());
  auto& sibs = sibling_vec(out, pb);
  auto at = sibs.begin() + static_cast<std::ptrdiff_t>(pb.back());
  at = sibs.erase(at);
  sibs.insert(at, bCopy.children.begin(), bCopy.children.end());
  return out;
}

}  // namespace

FTree tree_pushup(const FTree& tree, const std::string& classB) {
  return pushup_one_level(tree, classB);
}

FTree tree_swap(const FTree& tree, const std::string& classA,
                const std::string& classB) {
  NodePath pb = locate(tree, classB);
  if (pb.size() < 2)
    throw SemanticError("swap: class " + classB + " has no parent");
  NodePath pa(pb.begin(), pb.end() - 1);
  const FNode& a = node_at(tree, pa);
  auto ids = class_ids(a);
  if (std::find(ids.begin(), ids.end(), classA) == ids.end())
    throw SemanticError("swap: " + classA + " is not the parent of " + classB);
  const FNode& b = node_at(tree, pb);

  FNode newA = a;
  newA.children.erase(newA.children.begin() +
                      static_cast<std::ptrdiff_t>(pb.back()));
  FNode newB = b;
  newB.children.clear();
  for (const FNode& c : b.children) {
    if (dependent(tree, a, subtree_class_ids(c)))
      newA.children.push_back(c);
    else
      newB.children.push_back(c);
  }
  newB.children.push_back(std::move(newA));
  FTree out = tree;
  node_at(out, pa) = std::move(newB);
  return out;
}

FTree tree_merge(const FTree& tree, const std::string& classA,
                 const std::string& classB) {
  NodePath pa = locate(tree, classA);
  NodePath pb = locate(tree, classB);
  if (pa == pb) throw SemanticError("merge requires two distinct nodes");
  if (pa.size() != pb.size() ||
      !std::equal(pa.begin(), pa.end() - 1, pb.begin()))
    throw SemanticError("merge requires sibling nodes");
  const FNode& na = node_at(tree, pa);
  const FNode& nb = node_at(tree, pb);
  if (na.constant || nb.constant)
    throw SemanticError("cannot merge a constant node");
  FNode merged;
  merged.classes = na.classes;
  merged.classes.insert(merged.classes.end(), nb.classes.begin(),
                        nb.classes.end());
  merged.children = na.children;
  merged.children.insert(merged.children.end(), nb.children.begin(),
                         nb.children.end());
  FTree out = tree;
  node_at(out, pa) = std::move(merged);
  auto& sibs = sibling_vec(out, pb);
  sibs.erase(sibs.begin() + static_cast<std::ptrdiff_t>(pb.back()));
  return out;
}

FTree tree_absorb(const FTree& tree, const std::string& classA,
                  const std::string& classB) {
  NodePath pa = locate(tree, classA);
  NodePath pb = locate(tree, classB);
  if (pb.size() <= pa.size() || !is_prefix(pa, pb))
    throw SemanticError("absorb: " + classA + " is not a proper ancestor of " +
                        classB);
  return normalise_tree(absorb_raw(tree, pa, pb));
}

FRep op_pushup(const FRep& in, const std::string& classB) {
  FTree outTree = pushup_one_level(in.tree, classB);
  if (in.root->kind == FKind::Empty) return {std::move(outTree), in.root};
  NodePath pb = locate(in.tree, classB);
  NodePath pa(pb.begin(), pb.end() - 1);
  std::size_t j = pb.back();
  std::size_t nKids = node_at(in.tree, pa).children.size();
  auto fn = [&](const FExprPtr& uA) -> std::vector<FExprPtr> {
    // B's subtree does not depend on A, so its factor is the same in
    // every group; take the first copy and drop the rest.
    FExprPtr uB = unpack(uA->groups.at(0).second, nKids).at(j);
    std::vector<std::pair<Value, FExprPtr>> g;
    g.reserve(uA->groups.size());
    for (const auto& [v, child] : uA->groups) {
      auto fs = unpack(child, nKids);
      fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(j));
      g.emplace_back(v, pack_forest(std::move(fs)));
    }
    return {std::move(uB), FExpr::make_union(uA->classCount, std::move(g))};
  };
  return {std::move(outTree), rewrite_node(in.tree, in.root, pa, fn)};
}

FRep op_normalise(const FRep& in) {
  std::vector<std::string> log;
  FTree target = normalise_tree(in.tree, &log);
  FRep cur = in;
  for (const auto& cid : log) cur = op_pushup(cur, cid);
  if (serialize_ftree(cur.tree) != serialize_ftree(target))
    throw std::logic_error("normalise replay diverged from tree normalisation");
  return cur;
}

FRep op_swap(const FRep& in, const std::string& classA,
             const std::string& classB) {
  NodePath pb = locate(in.tree, classB);
  if (pb.size() < 2)
    throw SemanticError("swap: class " + classB + " has no parent");
  NodePath pa(pb.begin(), pb.end() - 1);
  const FNode& aNode = node_at(in.tree, pa);
  const FNode& bNode = node_at(in.tree, pb);
  FTree outTree = tree_swap(in.tree, classA, classB);
  if (in.root->kind == FKind::Empty) return {std::move(outTree), in.root};

  std::size_t j = pb.back();
  std::size_t nA = aNode.children.size();
  std::size_t nB = bNode.children.size();
  std::vector<std::size_t> tb, tab;  // B's children staying with B / moving to A
  for (std::size_t i = 0; i < nB; ++i) {
    if (dependent(in.tree, aNode, subtree_class_ids(bNode.children[i])))
      tab.push_back(i);
    else
      tb.push_back(i);
  }

  auto fn = [&](const FExprPtr& uA) -> std::vector<FExprPtr> {
    struct Src {
      Value a;
      std::vector<FExprPtr> ea;  // A-side factors without the B factor
      const FExpr* uB = nullptr;
      std::size_t pos = 0;
    };
    std::vector<Src> src;
    src.reserve(uA->groups.size());
    for (const auto& [a, child] : uA->groups) {
      auto fs = unpack(child, nA);
      Src s;
      s.a = a;
      s.uB = fs[j].get();
      fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(j));
      s.ea = std::move(fs);
      src.push_back(std::move(s));
    }
    std::size_t ccB = src.at(0).uB->classCount;

    // Merge the per-a unions over b in one pass, smallest b first; ties
    // pop in a order, so inner groups stay ascending as well.
    using HeapItem = std::pair<Value, std::size_t>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> pq;
    for (std::size_t i = 0; i < src.size(); ++i)
      pq.emplace(src[i].uB->groups.at(0).first, i);
    std::vector<std::pair<Value, FExprPtr>> bOut;
    while (!pq.empty()) {
      Value b = pq.top().first;
      std::vector<FExprPtr> fB;  // factors of the children staying with B
      bool haveFB = false;
      std::vector<std::pair<Value, FExprPtr>> aOut;
      while (!pq.empty() && pq.top().first == b) {
        std::size_t i = pq.top().second;
        pq.pop();
        Src& s = src[i];
        auto gfs = unpack(s.uB->groups[s.pos].second, nB);
        if (!haveFB) {
          for (auto k : tb) fB.push_back(gfs[k]);
          haveFB = true;
        }
        std::vector<FExprPtr> inner = s.ea;
        for (auto k : tab) inner.push_back(gfs[k]);
        aOut.emplace_back(s.a, pack_forest(std::move(inner)));
        if (++s.pos < s.uB->groups.size())
          pq.emplace(s.uB->groups[s.pos].first, i);
      }
      fB.push_back(FExpr::make_union(uA->classCount, std::move(aOut)));
      bOut.emplace_back(std::move(b), pack_forest(std::move(fB)));
    }
    return {FExpr::make_union(ccB, std::move(bOut))};
  };
  return {std::move(outTree), rewrite_node(in.tree, in.root, pa, fn)};
}

FRep op_product(const FRep& left, const FRep& right) {
  std::set<std::string> seen;
  walk_paths(left.tree, [&](const NodePath&, const FNode& n) {
    for (const auto& a : node_attributes(n)) seen.insert(a.qualified());
  });
  bool clash = false;
  walk_paths(right.tree, [&](const NodePath&, const FNode& n) {
    for (const auto& a : node_attributes(n))
      if (!seen.insert(a.qualified()).second) clash = true;
  });
  if (clash)
    throw SemanticError("product requires attribute-disjoint trees");

  FTree t;
  t.roots = left.tree.roots;
  t.roots.insert(t.roots.end(), right.tree.roots.begin(),
                 right.tree.roots.end());
  t.deps = left.tree.deps;
  t.deps.insert(t.deps.end(), right.tree.deps.begin(), right.tree.deps.end());

  if (left.root->kind == FKind::Empty || right.root->kind == FKind::Empty)
    return {std::move(t), FExpr::empty()};
  auto fs = left.tree.roots.empty() ? std::vector<FExprPtr>{}
                                    : unpack(left.root, left.tree.roots.size());
  auto fr = right.tree.roots.empty()
                ? std::vector<FExprPtr>{}
                : unpack(right.root, right.tree.roots.size());
  fs.insert(fs.end(), fr.begin(), fr.end());
  FExprPtr packed = pack_forest(std::move(fs));
  return {std::move(t), packed ? std::move(packed) : FExpr::nullary()};
}

FRep op_merge(const FRep& in, const std::string& classA,
              const std::string& classB) {
  NodePath pa = locate(in.tree, classA);
  NodePath pb = locate(in.tree, classB);
  FTree outTree = tree_merge(in.tree, classA, classB);  // validates siblings
  if (in.root->kind == FKind::Empty) return {std::move(outTree), in.root};

  const FNode& na = node_at(in.tree, pa);
  const FNode& nb = node_at(in.tree, pb);
  std::size_t iA = pa.back(), iB = pb.back();
  std::size_t nA = na.children.size(), nB = nb.children.size();
  std::size_t cc = na.classes.size() + nb.classes.size();
  NodePath fp(pa.begin(), pa.end() - 1);

  auto fn = [&](std::vector<FExprPtr> fs) {
    const FExprPtr uA = fs.at(iA);
    const FExprPtr uB = fs.at(iB);
    std::vector<std::pair<Value, FExprPtr>> g;
    std::size_t i = 0, k = 0;
    while (i < uA->groups.size() && k < uB->groups.size()) {
      const Value& a = uA->groups[i].first;
      const Value& b = uB->groups[k].first;
      if (a < b) {
        ++i;
      } else if (b < a) {
        ++k;
      } else {
        auto f1 = unpack(uA->groups[i].second, nA);
        auto f2 = unpack(uB->groups[k].second, nB);
        f1.insert(f1.end(), std::make_move_iterator(f2.begin()),
                  std::make_move_iterator(f2.end()));
        g.emplace_back(a, pack_forest(std::move(f1)));
        ++i;
        ++k;
      }
    }
    fs[iA] = g.empty() ? FExpr::empty() : FExpr::make_union(cc, std::move(g));
    fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(iB));
    return fs;
  };
  return {std::move(outTree), rewrite_root(in.tree, in.root, fp, fn)};
}

FRep op_absorb(const FRep& in, const std::string& classA,
               const std::string& classB) {
  NodePath pa = locate(in.tree, classA);
  NodePath pb = locate(in.tree, classB);
  if (pb.size() <= pa.size() || !is_prefix(pa, pb))
    throw SemanticError("absorb: " + classA + " is not a proper ancestor of " +
                        classB);
  FTree midTree = absorb_raw(in.tree, pa, pb);
  if (in.root->kind == FKind::Empty)
    return op_normalise({std::move(midTree), in.root});

  const FNode& aNode = node_at(in.tree, pa);
  const FNode& bNode = node_at(in.tree, pb);
  std::size_t nAkids = aNode.children.size();
  std::size_t nBkids = bNode.children.size();
  std::size_t ccB = bNode.classes.size();
  NodePath rel(pb.begin() + static_cast<std::ptrdiff_t>(pa.size()), pb.end());
  NodePath fpInner(rel.begin(), rel.end() - 1);
  std::size_t bIdx = rel.back();
  std::vector<const FNode*> aKids;
  for (const auto& c : aNode.children) aKids.push_back(&c);

  auto fn = [&](const FExprPtr& uA) -> std::vector<FExprPtr> {
    std::vector<std::pair<Value, FExprPtr>> g;
    for (const auto& [a, child] : uA->groups) {
      // Restrict every B union in this group's scope to the value a.
      auto fnB = [&, aVal = a](std::vector<FExprPtr> fs) {
        const FExprPtr uB = fs.at(bIdx);
        const auto& gs = uB->groups;
        auto git = std::lower_bound(
            gs.begin(), gs.end(), aVal,
            [](const std::pair<Value, FExprPtr>& gr, const Value& v) {
              return gr.first < v;
            });
        if (git == gs.end() || !(git->first == aVal)) {
          fs[bIdx] = FExpr::empty();
          return fs;
        }
        auto spliced = unpack(git->second, nBkids);
        fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(bIdx));
        fs.insert(fs.begin() + static_cast<std::ptrdiff_t>(bIdx),
                  std::make_move_iterator(spliced.begin()),
                  std::make_move_iterator(spliced.end()));
        return fs;
      };
      Memo memoInner(fpInner.size());
      auto out = rewrite_factors(aKids, unpack(child, nAkids), fpInner, 0, fnB,
                                 memoInner);
      FExprPtr packed = pack_forest(std::move(out));
      if (packed && packed->kind == FKind::Empty) continue;
      g.emplace_back(a, std::move(packed));
    }
    return {g.empty() ? FExpr::empty()
                      : FExpr::make_union(uA->classCount + ccB, std::move(g))};
  };
  FExprPtr midRoot = rewrite_node(in.tree, in.root, pa, fn);
  return op_normalise({std::move(midTree), std::move(midRoot)});
}

FRep op_select_const(const FRep& in, const std::string& attr, CmpOp op,
                     const Value& c) {
  NodePath path = resolve_attr(in.tree, attr);
  const FNode& nd = node_at(in.tree, path);

  auto filt = [&](const FExprPtr& u) -> FExprPtr {
    std::vector<std::pair<Value, FExprPtr>> g;
    for (const auto& [v, ch] : u->groups) {
      if (v.is_int() != c.is_int())
        throw SemanticError("selection constant does not match the value domain of " +
                            attr);
      if (eval_cmp(v, op, c)) g.emplace_back(v, ch);
    }
    return g.empty() ? FExpr::empty()
                     : FExpr::make_union(u->classCount, std::move(g));
  };

  if (op != CmpOp::Eq || nd.constant) {
    if (in.root->kind == FKind::Empty) return in;
    auto fn = [&](const FExprPtr& u) { return std::vector<FExprPtr>{filt(u)}; };
    return {in.tree, rewrite_node(in.tree, in.root, path, fn)};
  }

  // Equality: the surviving singleton is common to the whole expression,
  // so it hoists to a constant root and the node's children take its
  // place; a final normalisation lets freed subtrees move up.
  FTree midTree = in.tree;
  const FNode ndCopy = nd;
  {
    auto& sibs = sibling_vec(midTree, path);
    auto at = sibs.erase(sibs.begin() + static_cast<std::ptrdiff_t>(path.back()));
    sibs.insert(at, ndCopy.children.begin(), ndCopy.children.end());
    FNode cn;
    cn.classes = ndCopy.classes;
    cn.constant = true;
    midTree.roots.insert(midTree.roots.begin(), std::move(cn));
  }
  FExprPtr midRoot = in.root;
  if (in.root->kind != FKind::Empty) {
    auto fn = [&](const FExprPtr& u) -> std::vector<FExprPtr> {
      FExprPtr f = filt(u);
      if (f->kind == FKind::Empty) return {std::move(f)};
      return unpack(f->groups.at(0).second, ndCopy.children.size());
    };
    FExprPtr spliced = rewrite_node(in.tree, in.root, path, fn);
    if (spliced->kind == FKind::Empty) {
      midRoot = std::move(spliced);
    } else {
      FExprPtr cu = FExpr::make_union(ndCopy.classes.size(), {{c, nullptr}});
      midRoot = product_of({std::move(cu), std::move(spliced)});
    }
  }
  return op_normalise({std::move(midTree), std::move(midRoot)});
}

FRep op_project(const FRep& in, const std::vector<std::string>& keepAttrs) {
  std::set<std::string> keep;
  for (const auto& s : keepAttrs) {
    NodePath p = resolve_attr(in.tree, s);
    for (const auto& cls : node_at(in.tree, p).classes) {
      if (cls.id == s) keep.insert(cls.id);
      for (const auto& m : cls.members)
        if (m.qualified() == s) keep.insert(cls.id);
    }
  }
  bool anyMarked = false;
  walk_paths(in.tree, [&](const NodePath&, const FNode& n) {
    for (const auto& cls : n.classes)
      if (!keep.count(cls.id)) anyMarked = true;
  });
  if (!anyMarked) return in;

  FRep cur = in;

  // Classes sharing a node with kept ones duplicate the node's values,
  // so they drop in place; dependency sets substitute a kept sibling.
  std::vector<NodePath> partial;
  walk_paths(cur.tree, [&](const NodePath& p, const FNode& n) {
    bool hasKept = false, hasMarked = false;
    for (const auto& cls : n.classes)
      (keep.count(cls.id) ? hasKept : hasMarked) = true;
    if (hasKept && hasMarked) partial.push_back(p);
  });
  for (const auto& p : partial) {
    const FNode& nd = node_at(cur.tree, p);
    std::vector<AttributeClass> kept;
    std::vector<std::string> dropped;
    for (const auto& cls : nd.classes) {
      if (keep.count(cls.id))
        kept.push_back(cls);
      else
        dropped.push_back(cls.id);
    }
    if (cur.root->kind != FKind::Empty) {
      std::size_t cc = kept.size();
      auto fn = [&](const FExprPtr& u) {
        return std::vector<FExprPtr>{FExpr::make_union(cc, u->groups)};
      };
      cur.root = rewrite_node(cur.tree, cur.root, p, fn);
    }
    node_at(cur.tree, p).classes = kept;
    const std::string& sub = kept.front().id;
    for (auto& d : cur.tree.deps) {
      bool hit = false;
      auto end = std::remove_if(d.classes.begin(), d.classes.end(),
                                [&](const std::string& c) {
                                  bool rm = std::find(dropped.begin(),
                                                      dropped.end(),
                                                      c) != dropped.end();
                                  hit = hit || rm;
                                  return rm;
                                });
      if (end != d.classes.end()) d.classes.erase(end, d.classes.end());
      if (hit) d.classes.push_back(sub);
      std::sort(d.classes.begin(), d.classes.end());
      d.classes.erase(std::unique(d.classes.begin(), d.classes.end()),
                      d.classes.end());
    }
  }

  // Fully marked nodes: remove marked leaves outright; swap marked
  // inner nodes downward, deepest first, choosing the child that gives
  // the cheapest tree (ties by smallest class id).
  while (true) {
    std::vector<NodePath> full;
    walk_paths(cur.tree, [&](const NodePath& p, const FNode& n) {
      bool all = true;
      for (const auto& cls : n.classes)
        if (keep.count(cls.id)) all = false;
      if (all) full.push_back(p);
    });
    if (full.empty()) break;

    std::optional<NodePath> leaf;
    for (const auto& p : full) {
      if (!node_at(cur.tree, p).children.empty()) continue;
      if (!leaf || min_class_id(node_at(cur.tree, p)) <
                       min_class_id(node_at(cur.tree, *leaf)))
        leaf = p;
    }
    if (leaf) {
      const FNode removed = node_at(cur.tree, *leaf);
      if (cur.root->kind != FKind::Empty) {
        auto fn = [](const FExprPtr&) { return std::vector<FExprPtr>{}; };
        cur.root = rewrite_node(cur.tree, cur.root, *leaf, fn);
      }
      auto& sibs = sibling_vec(cur.tree, *leaf);
      sibs.erase(sibs.begin() + static_cast<std::ptrdiff_t>(leaf->back()));
      cur.tree.deps = strip_dep_classes(cur.tree.deps, class_ids(removed));
      continue;
    }

    NodePath deepest = full.front();
    for (const auto& p : full) {
      if (p.size() > deepest.size() ||
          (p.size() == deepest.size() &&
           min_class_id(node_at(cur.tree, p)) <
               min_class_id(node_at(cur.tree, deepest))))
        deepest = p;
    }
    const FNode& nd = node_at(cur.tree, deepest);
    const std::string parentId = nd.classes.front().id;
    std::optional<std::pair<Rational, std::string>> best;
    std::string bestChild;
    for (const auto& c : nd.children) {
      std::string cid = c.classes.front().id;
      Rational cost = s_cost(tree_swap(cur.tree, parentId, cid));
      std::pair<Rational, std::string> key{cost, min_class_id(c)};
      if (!best || key < *best) {
        best = key;
        bestChild = cid;
      }
    }
    cur = op_swap(cur, parentId, bestChild);
  }

  return op_normalise(cur);
}

}  // namespace fdb
