#include "fdb/frep.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "sexpr.hpp"

namespace fdb {

namespace {

FExprPtr make(FExpr e) { return std::make_shared<const FExpr>(std::move(e)); }

}  // namespace

FExprPtr FExpr::empty() {
  static const FExprPtr e = make(FExpr{});
  return e;
}

FExprPtr FExpr::nullary() {
  FExpr e;
  e.kind = FKind::Nullary;
  static const FExprPtr n = make(std::move(e));
  return n;
}

FExprPtr FExpr::make_union(std::size_t classCount,
                           std::vector<std::pair<Value, FExprPtr>> groups) {
  FExpr e;
  e.kind = FKind::Union;
  e.classCount = classCount;
  e.groups = std::move(groups);
  return make(std::move(e));
}

FExprPtr FExpr::make_product(std::vector<FExprPtr> factors) {
  FExpr e;
  e.kind = FKind::Product;
  e.factors = std::move(factors);
  return make(std::move(e));
}

FExprPtr product_of(std::vector<FExprPtr> factors) {
  std::vector<FExprPtr> flat;
  for (FExprPtr& f : factors) {
    if (!f) throw std::logic_error("null factor");
    if (f->kind == FKind::Empty) return FExpr::empty();
    if (f->kind == FKind::Nullary) continue;
    if (f->kind == FKind::Product)
      flat.insert(flat.end(), f->factors.begin(), f->factors.end());
    else
      flat.push_back(std::move(f));
  }
  if (flat.empty()) return FExpr::nullary();
  if (flat.size() == 1) return flat.front();
  return FExpr::make_product(std::move(flat));
}

std::vector<FExprPtr> child_factors(const FExprPtr& groupChild) {
  if (!groupChild) return {};
  if (groupChild->kind == FKind::Product) return groupChild->factors;
  return {groupChild};
}

// ---------------------------------------------------------------------------
// Construction

namespace {

/// Per-atom scan state: surviving row indices sorted by the atom's
/// classes in root-to-leaf order, one representative column per class.
struct AtomScan {
  const Relation* rel = nullptr;
  std::vector<std::size_t> keyCols;    // representative column per path class
  std::vector<std::string> keyClasses; // parallel class ids
  std::vector<std::size_t> rows;       // surviving rows, sorted by key
};

struct NodeEntry {
  std::size_t atom;    // index into scans
  std::size_t keyLo;   // first key position on this node
  std::size_t keyHi;   // one past the last
};

struct Builder {
  const FTree& tree;
  const Deadline& deadline;
  std::vector<AtomScan> scans;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // per atom
  std::map<const FNode*, std::vector<NodeEntry>> nodeEntries;

  Value key_value(const AtomScan& s, std::size_t row, std::size_t keyPos) const {
    return s.rel->at(s.rows[row], s.keyCols[keyPos]);
  }

  /// Narrows [lo,hi) of `s` to rows whose key columns [keyLo,keyHi) all
  /// equal v; returns an empty range when none do.  Rows are sorted by
  /// these columns, so each narrowing keeps a contiguous block.
  std::pair<std::size_t, std::size_t> narrow(const AtomScan& s, std::size_t lo,
                                             std::size_t hi, std::size_t keyLo,
                                             std::size_t keyHi, const Value& v) const {
    for (std::size_t k = keyLo; k < keyHi && lo < hi; ++k) {
      while (lo < hi && key_value(s, lo, k) < v) ++lo;
      std::size_t end = lo;
      while (end < hi && key_value(s, end, k) == v) ++end;
      hi = end;
    }
    return {lo, hi};
  }

  FExprPtr build_node(const FNode& node) {
    deadline.check("factorise");
    const std::vector<NodeEntry>& entries = nodeEntries.at(&node);
    std::vector<std::size_t> pos;
    for (const NodeEntry& e : entries) pos.push_back(ranges[e.atom].first);

    std::vector<std::pair<Value, FExprPtr>> groups;
    while (true) {
      // Align all scans on the next common value.
      bool exhausted = false;
      for (std::size_t i = 0; i < entries.size(); ++i)
        if (pos[i] >= ranges[entries[i].atom].second) exhausted = true;
      if (exhausted) break;

      Value target = key_value(scans[entries[0].atom], pos[0], entries[0].keyLo);
      bool aligned = true;
      for (std::size_t i = 1; i < entries.size(); ++i) {
        Value v = key_value(scans[entries[i].atom], pos[i], entries[i].keyLo);
        if (v < target) aligned = false;
        if (target < v) target = v, aligned = false;
      }
      if (!aligned) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
          const NodeEntry& e = entries[i];
          std::size_t hi = ranges[e.atom].second;
          while (pos[i] < hi &&
                 key_value(scans[e.atom], pos[i], e.keyLo) < target)
            ++pos[i];
        }
        continue;
      }

      // All first columns sit on `target`; require the remaining node
      // classes of each atom to match too.
      std::vector<std::pair<std::size_t, std::size_t>> saved;
      bool ok = true;
      for (const NodeEntry& e : entries) saved.push_back(ranges[e.atom]);
      for (std::size_t i = 0; i < entries.size() && ok; ++i) {
        const NodeEntry& e = entries[i];
        auto sub = narrow(scans[e.atom], pos[i], ranges[e.atom].second, e.keyLo,
                          e.keyHi, target);
        if (sub.first >= sub.second)
          ok = false;
        else
          ranges[e.atom] = sub;
      }

      if (ok) {
        std::vector<FExprPtr> kids;
        for (const FNode& child : node.children) {
          FExprPtr sub = build_node(child);
          if (sub->kind == FKind::Empty) {
            ok = false;
            break;
          }
          kids.push_back(std::move(sub));
        }
        if (ok) {
          FExprPtr child =
              kids.empty() ? nullptr : product_of(std::move(kids));
          groups.emplace_back(target, std::move(child));
        }
      }

      for (std::size_t i = 0; i < entries.size(); ++i)
        ranges[entries[i].atom] = saved[i];
      // Step past this value's run in every scan.
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const NodeEntry& e = entries[i];
        std::size_t hi = ranges[e.atom].second;
        while (pos[i] < hi &&
               key_value(scans[e.atom], pos[i], e.keyLo) == target)
          ++pos[i];
      }
    }

    if (groups.empty()) return FExpr::empty();
    return FExpr::make_union(node.classes.size(), std::move(groups));
  }
};

}  // namespace

FRep factorise(const Database& db, const Query& query, const FTree& tree,
               const Deadline& deadline) {
  query.bind(db);
  validate_ftree(tree);

  std::vector<AttributeClass> classes = equivalence_classes(query);
  std::vector<DependencySet> expected = dependency_sets(query, classes);
  auto depsKey = [](std::vector<DependencySet> d) {
    std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) {
      return std::tie(a.source, a.classes) < std::tie(b.source, b.classes);
    });
    return d;
  };
  std::vector<DependencySet> given = depsKey(tree.deps);
  std::vector<DependencySet> want = depsKey(expected);
  bool same = given.size() == want.size();
  for (std::size_t i = 0; same && i < given.size(); ++i)
    same = given[i].source == want[i].source && given[i].classes == want[i].classes;
  if (!same) throw SemanticError("f-tree does not belong to this query");

  for (const FNode& r : tree.roots)
    if (r.constant)
      throw SemanticError(
          "cannot factorise over constant nodes; apply selections afterwards");

  // Depth-first rank of every class: ancestors rank before descendants,
  // classes of one node stay adjacent.
  std::map<std::string, std::size_t> rank;
  std::map<std::string, const FNode*> owner;
  {
    std::size_t next = 0;
    std::function<void(const FNode&)> walk = [&](const FNode& n) {
      for (const AttributeClass& c : n.classes) {
        rank[c.id] = next++;
        owner[c.id] = &n;
      }
      for (const FNode& ch : n.children) walk(ch);
    };
    for (const FNode& r : tree.roots) walk(r);
  }

  std::map<Attribute, std::string> classOf;
  for (const AttributeClass& c : classes)
    for (const Attribute& m : c.members) classOf[m] = c.id;

  Builder b{tree, deadline, {}, {}, {}};
  for (const QueryAtom& qa : query.atoms) {
    AtomScan s;
    s.rel = &db.relation(qa.relation);

    // One representative column per class; extra columns of the same
    // class become an equality filter on the rows.
    std::map<std::string, std::vector<std::size_t>> byClass;
    for (std::size_t c = 0; c < qa.columns.size(); ++c)
      byClass[classOf.at({qa.name, qa.columns[c]})].push_back(c);
    std::vector<std::string> ordered;
    for (const auto& [cid, cols] : byClass) ordered.push_back(cid);
    std::sort(ordered.begin(), ordered.end(),
              [&](const std::string& a, const std::string& c) {
                return rank.at(a) < rank.at(c);
              });
    for (const std::string& cid : ordered) {
      s.keyCols.push_back(byClass.at(cid).front());
      s.keyClasses.push_back(cid);
    }

    for (std::size_t r = 0; r < s.rel->row_count(); ++r) {
      bool keep = true;
      for (const auto& [cid, cols] : byClass)
        for (std::size_t c : cols)
          if (!(s.rel->at(r, c) == s.rel->at(r, cols.front()))) keep = false;
      if (keep) s.rows.push_back(r);
    }
    std::sort(s.rows.begin(), s.rows.end(), [&](std::size_t x, std::size_t y) {
      for (std::size_t c : s.keyCols) {
        const Value& vx = s.rel->at(x, c);
        const Value& vy = s.rel->at(y, c);
        if (vx < vy) return true;
        if (vy < vx) return false;
      }
      return false;
    });

    b.ranges.emplace_back(0, s.rows.size());
    b.scans.push_back(std::move(s));
  }

  // Group each atom's consecutive key positions by owning node.
  for (std::size_t a = 0; a < b.scans.size(); ++a) {
    const AtomScan& s = b.scans[a];
    std::size_t k = 0;
    while (k < s.keyClasses.size()) {
      const FNode* n = owner.at(s.keyClasses[k]);
      std::size_t k2 = k + 1;
      while (k2 < s.keyClasses.size() && owner.at(s.keyClasses[k2]) == n) ++k2;
      b.nodeEntries[n].push_back({a, k, k2});
      k = k2;
    }
  }
  // Every node is covered by some atom (labels match the dependency
  // sets), so no entry list is empty.
  std::function<void(const FNode&)> ensure = [&](const FNode& n) {
    if (b.nodeEntries[&n].empty())
      throw std::logic_error("uncovered node " + class_ids(n).front());
    for (const FNode& ch : n.children) ensure(ch);
  };
  for (const FNode& r : tree.roots) ensure(r);

  std::vector<FExprPtr> factors;
  bool empty = false;
  for (const FNode& r : tree.roots) {
    FExprPtr e = b.build_node(r);
    if (e->kind == FKind::Empty) empty = true;
    factors.push_back(std::move(e));
  }

  FRep rep;
  rep.tree = tree;
  rep.root = empty ? FExpr::empty() : product_of(std::move(factors));
  return rep;
}

// ---------------------------------------------------------------------------
// Counting and size

std::size_t count_tuples(const FExprPtr& expr) {
  std::unordered_map<const FExpr*, std::size_t> memo;
  std::function<std::size_t(const FExprPtr&)> go = [&](const FExprPtr& e)
      -> std::size_t {
    if (!e) return 1;
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    std::size_t n = 0;
    switch (e->kind) {
      case FKind::Empty: n = 0; break;
      case FKind::Nullary: n = 1; break;
      case FKind::Union:
        for (const auto& [v, child] : e->groups) n += child ? go(child) : 1;
        break;
      case FKind::Product:
        n = 1;
        for (const FExprPtr& f : e->factors) n *= go(f);
        break;
    }
    memo.emplace(e.get(), n);
    return n;
  };
  return go(expr);
}

std::size_t rep_size(const FExprPtr& expr) {
  std::unordered_map<const FExpr*, std::size_t> memo;
  std::function<std::size_t(const FExprPtr&)> go = [&](const FExprPtr& e)
      -> std::size_t {
    if (!e) return 0;
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    std::size_t n = 0;
    switch (e->kind) {
      case FKind::Empty:
      case FKind::Nullary:
        break;
      case FKind::Union:
        n = e->groups.size() * e->classCount;
        for (const auto& [v, child] : e->groups) n += go(child);
        break;
      case FKind::Product:
        for (const FExprPtr& f : e->factors) n += go(f);
        break;
    }
    memo.emplace(e.get(), n);
    return n;
  };
  return go(expr);
}

std::vector<std::string> tuple_schema(const FTree& tree) {
  std::vector<std::string> out;
  std::function<void(const FNode&)> walk = [&](const FNode& n) {
    for (const AttributeClass& c : n.classes) out.push_back(c.id);
    for (const FNode& ch : n.children) walk(ch);
  };
  for (const FNode& r : tree.roots) walk(r);
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

void first_frames(const FExpr* e, std::vector<TupleIterator::Frame>& out);

}  // namespace

// Frames are rebuilt into a fresh vector on every advance; `step` reads
// the previous assignment positionally and returns false when the whole
// subexpression rolled over to its first assignment.
struct TupleStepper {
  const std::vector<TupleIterator::Frame>& old;

  void skip(const FExpr* e, std::size_t& cur) const {
    if (!e || e->kind == FKind::Nullary || e->kind == FKind::Empty) return;
    if (e->kind == FKind::Union) {
      std::size_t p = old[cur++].pick;
      skip(e->groups[p].second.get(), cur);
      return;
    }
    for (const FExprPtr& f : e->factors) skip(f.get(), cur);
  }

  bool step(const FExpr* e, std::size_t& cur,
            std::vector<TupleIterator::Frame>& out) const {
    if (!e || e->kind == FKind::Nullary || e->kind == FKind::Empty) return false;
    if (e->kind == FKind::Union) {
      std::size_t slot = out.size();
      std::size_t p = old[cur++].pick;
      out.push_back({e, p});
      if (step(e->groups[p].second.get(), cur, out)) return true;
      out.resize(slot + 1);
      if (p + 1 < e->groups.size()) {
        out[slot].pick = p + 1;
        first_frames(e->groups[p + 1].second.get(), out);
        return true;
      }
      out[slot].pick = 0;
      first_frames(e->groups[0].second.get(), out);
      return false;
    }
    // Product: advance the last factor that can move, reset the rest.
    std::vector<std::size_t> starts(e->factors.size());
    for (std::size_t j = 0; j < e->factors.size(); ++j) {
      starts[j] = cur;
      skip(e->factors[j].get(), cur);
    }
    for (std::size_t j = e->factors.size(); j-- > 0;) {
      std::vector<TupleIterator::Frame> scratch;
      std::size_t c = starts[j];
      if (step(e->factors[j].get(), c, scratch)) {
        out.insert(out.end(), old.begin() + static_cast<std::ptrdiff_t>(starts[0]),
                   old.begin() + static_cast<std::ptrdiff_t>(starts[j]));
        out.insert(out.end(), scratch.begin(), scratch.end());
        for (std::size_t m = j + 1; m < e->factors.size(); ++m)
          first_frames(e->factors[m].get(), out);
        return true;
      }
    }
    for (const FExprPtr& f : e->factors) first_frames(f.get(), out);
    return false;
  }
};

namespace {

void first_frames(const FExpr* e, std::vector<TupleIterator::Frame>& out) {
  if (!e || e->kind == FKind::Nullary || e->kind == FKind::Empty) return;
  if (e->kind == FKind::Union) {
    if (e->groups.empty()) throw std::logic_error("empty union in frep");
    out.push_back({e, 0});
    first_frames(e->groups[0].second.get(), out);
    return;
  }
  for (const FExprPtr& f : e->factors) first_frames(f.get(), out);
}

}  // namespace

TupleIterator::TupleIterator(FExprPtr root) : root_(std::move(root)) {
  if (!root_ || root_->kind == FKind::Empty) {
    done_ = true;
    return;
  }
  first_frames(root_.get(), frames_);
  rebuild_tuple();
}

void TupleIterator::rebuild_tuple() {
  tuple_.clear();
  for (const Frame& f : frames_)
    for (std::size_t k = 0; k < f.node->classCount; ++k)
      tuple_.push_back(f.node->groups[f.pick].first);
}

void TupleIterator::advance() {
  if (done_) return;
  std::vector<Frame> next;
  std::size_t cur = 0;
  TupleStepper s{frames_};
  if (!s.step(root_.get(), cur, next)) {
    done_ = true;
    return;
  }
  frames_ = std::move(next);
  rebuild_tuple();
}

std::vector<std::vector<Value>> enumerate_all(const FExprPtr& expr) {
  std::vector<std::vector<Value>> out;
  for (TupleIterator it(expr); !it.done(); it.advance()) out.push_back(it.tuple());
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string value_text(const Value& v) {
  std::string text = v.to_string();
  bool force = v.is_string() && Value::is_integer_literal(text);
  return detail::quote_atom(text, force);
}

void serialize_expr(const FExpr* e, std::string& out) {
  if (!e) throw std::logic_error("null expression");
  switch (e->kind) {
    case FKind::Empty:
      out += 'E';
      return;
    case FKind::Nullary:
      out += "()";
      return;
    case FKind::Union:
      out += "(u";
      for (const auto& [v, child] : e->groups) {
        out += " (v ";
        out += value_text(v);
        if (child) {
          out += ' ';
          serialize_expr(child.get(), out);
        }
        out += ')';
      }
      out += ')';
      return;
    case FKind::Product:
      out += "(x";
      for (const FExprPtr& f : e->factors) {
        out += ' ';
        serialize_expr(f.get(), out);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string serialize_frep(const FExprPtr& expr) {
  std::string out;
  serialize_expr(expr.get(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing and validation

namespace {

using detail::Sexpr;

[[noreturn]] void mismatch(const Sexpr& s, const std::string& what) {
  throw SemanticError("frep: " + what + " at " + std::to_string(s.line) + ":" +
                      std::to_string(s.col));
}

bool is_head(const Sexpr& s, const char* head) {
  return s.is_list && !s.items.empty() && !s.items[0].is_list &&
         !s.items[0].quoted && s.items[0].atom == head;
}

FExprPtr build_node_expr(const Sexpr& s, const FNode& node);

FExprPtr build_forest_expr(const Sexpr& s, const std::vector<FNode>& nodes) {
  if (nodes.size() == 1) return build_node_expr(s, nodes.front());
  if (!is_head(s, "x")) mismatch(s, "expected a product for this forest");
  if (s.items.size() - 1 != nodes.size())
    mismatch(s, "product arity does not match the forest");
  std::vector<FExprPtr> factors;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    factors.push_back(build_node_expr(s.items[i + 1], nodes[i]));
  return FExpr::make_product(std::move(factors));
}

FExprPtr build_node_expr(const Sexpr& s, const FNode& node) {
  if (!is_head(s, "u")) mismatch(s, "expected a union for a tree node");
  if (s.items.size() == 1) mismatch(s, "empty union");
  std::vector<std::pair<Value, FExprPtr>> groups;
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    const Sexpr& g = s.items[i];
    if (!is_head(g, "v") || g.items.size() < 2 || g.items.size() > 3 ||
        g.items[1].is_list)
      mismatch(g, "expected (v VALUE SUBEXPR?)");
    Value v = g.items[1].quoted ? Value::string(g.items[1].atom)
                                : Value::parse(g.items[1].atom);
    if (!groups.empty() && !(groups.back().first < v))
      mismatch(g, "union values must strictly ascend");
    FExprPtr child;
    if (node.children.empty()) {
      if (g.items.size() == 3) mismatch(g, "leaf group with a subexpression");
    } else {
      if (g.items.size() != 3) mismatch(g, "group is missing its subexpression");
      child = build_forest_expr(g.items[2], node.children);
    }
    groups.emplace_back(std::move(v), std::move(child));
  }
  if (node.constant && groups.size() != 1)
    mismatch(s, "constant node must hold exactly one value");
  return FExpr::make_union(node.classes.size(), std::move(groups));
}

void check_node_expr(const FExpr* e, const FNode& node);

void check_forest_expr(const FExpr* e, const std::vector<FNode>& nodes) {
  if (nodes.size() == 1) {
    check_node_expr(e, nodes.front());
    return;
  }
  if (!e || e->kind != FKind::Product || e->factors.size() != nodes.size())
    throw SemanticError("frep: product does not match the forest");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    check_node_expr(e->factors[i].get(), nodes[i]);
}

void check_node_expr(const FExpr* e, const FNode& node) {
  if (!e || e->kind != FKind::Union)
    throw SemanticError("frep: expected a union for a tree node");
  if (e->groups.empty()) throw SemanticError("frep: empty union");
  if (e->classCount != node.classes.size())
    throw SemanticError("frep: union class count does not match its node");
  if (node.constant && e->groups.size() != 1)
    throw SemanticError("frep: constant node must hold exactly one value");
  const Value* prev = nullptr;
  for (const auto& [v, child] : e->groups) {
    if (prev && !(*prev < v))
      throw SemanticError("frep: union values must strictly ascend");
    prev = &v;
    if (node.children.empty()) {
      if (child) throw SemanticError("frep: leaf group with a subexpression");
    } else {
      check_forest_expr(child.get(), node.children);
    }
  }
}

}  // namespace

FRep parse_frep(const std::string& text, const FTree& tree) {
  validate_ftree(tree);
  Sexpr s = detail::parse_sexpr(text);

  FRep rep;
  rep.tree = tree;
  if (!s.is_list && !s.quoted && s.atom == "E") {
    rep.root = FExpr::empty();
    return rep;
  }
  rep.root = build_forest_expr(s, tree.roots);
  return rep;
}

void validate_frep(const FRep& rep) {
  validate_ftree(rep.tree);
  if (!rep.root) throw SemanticError("frep: missing expression");
  if (rep.root->kind == FKind::Empty) return;
  check_forest_expr(rep.root.get(), rep.tree.roots);
}

}  // namespace fdb
