#include "fdb/ftree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "fdb/baseline.hpp"
#include "fdb/errors.hpp"
#include "fdb/lp.hpp"
#include "sexpr.hpp"

namespace fdb {
namespace {

template <typename F>
void for_each_node(const FNode& node, const NodePath& path, F&& fn) {
  fn(node, path);
  NodePath child = path;
  child.push_back(0);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    child.back() = i;
    for_each_node(node.children[i], child, fn);
  }
}

template <typename F>
void for_each_node(const FTree& tree, F&& fn) {
  NodePath path{0};
  for (std::size_t i = 0; i < tree.roots.size(); ++i) {
    path[0] = i;
    for_each_node(tree.roots[i], path, fn);
  }
}

/// Bitmask over dependency-set indices for fast dependence tests.
class DepMasks {
 public:
  explicit DepMasks(const FTree& tree) {
    if (tree.deps.size() > 64)
      throw BudgetError("more than 64 dependency sets");
    for (std::size_t i = 0; i < tree.deps.size(); ++i)
      for (const std::string& id : tree.deps[i].classes)
        class_[id] |= std::uint64_t(1) << i;
  }

  std::uint64_t of_class(const std::string& id) const {
    auto it = class_.find(id);
    return it == class_.end() ? 0 : it->second;
  }
  std::uint64_t of_node(const FNode& n) const {
    std::uint64_t m = 0;
    for (const AttributeClass& c : n.classes) m |= of_class(c.id);
    return m;
  }
  std::uint64_t of_subtree(const FNode& n) const {
    std::uint64_t m = of_node(n);
    for (const FNode& c : n.children) m |= of_subtree(c);
    return m;
  }

 private:
  std::map<std::string, std::uint64_t> class_;
};

Attribute parse_attribute(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
    throw SemanticError("malformed attribute '" + text + "'");
  return {text.substr(0, dot), text.substr(dot + 1)};
}

}  // namespace

const FNode& node_at(const FTree& tree, const NodePath& path) {
  const FNode* n = &tree.roots.at(path.at(0));
  for (std::size_t i = 1; i < path.size(); ++i) n = &n->children.at(path[i]);
  return *n;
}

FNode& node_at(FTree& tree, const NodePath& path) {
  FNode* n = &tree.roots.at(path.at(0));
  for (std::size_t i = 1; i < path.size(); ++i) n = &n->children.at(path[i]);
  return *n;
}

std::vector<std::string> class_ids(const FNode& node) {
  std::vector<std::string> ids;
  for (const AttributeClass& c : node.classes) ids.push_back(c.id);
  return ids;
}

std::vector<std::string> subtree_class_ids(const FNode& node) {
  std::vector<std::string> ids = class_ids(node);
  for (const FNode& c : node.children) {
    auto sub = subtree_class_ids(c);
    ids.insert(ids.end(), sub.begin(), sub.end());
  }
  return ids;
}

std::vector<Attribute> node_attributes(const FNode& node) {
  std::vector<Attribute> attrs;
  for (const AttributeClass& c : node.classes)
    attrs.insert(attrs.end(), c.members.begin(), c.members.end());
  return attrs;
}

std::optional<NodePath> find_class(const FTree& tree, const std::string& classId) {
  std::optional<NodePath> found;
  for_each_node(tree, [&](const FNode& n, const NodePath& p) {
    if (found) return;
    for (const AttributeClass& c : n.classes)
      if (c.id == classId) {
        found = p;
        return;
      }
  });
  return found;
}

bool dependent(const FTree& tree, const FNode& node,
               const std::vector<std::string>& subtreeIds) {
  DepMasks masks(tree);
  std::uint64_t sub = 0;
  for (const std::string& id : subtreeIds) sub |= masks.of_class(id);
  return (masks.of_node(node) & sub) != 0;
}

std::optional<PathViolation> check_path_constraint(const FTree& tree) {
  std::map<std::string, NodePath> where;
  std::set<std::string> constant;
  for_each_node(tree, [&](const FNode& n, const NodePath& p) {
    for (const AttributeClass& c : n.classes) {
      where[c.id] = p;
      if (n.constant) constant.insert(c.id);
    }
  });

  auto is_prefix = [](const NodePath& a, const NodePath& b) {
    if (a.size() > b.size()) return false;
    return std::equal(a.begin(), a.end(), b.begin());
  };

  for (const DependencySet& dep : tree.deps) {
    std::vector<std::pair<NodePath, std::string>> present;
    for (const std::string& id : dep.classes) {
      auto it = where.find(id);
      if (it == where.end() || constant.count(id)) continue;
      present.emplace_back(it->second, id);
    }
    std::sort(present.begin(), present.end(),
              [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
    for (std::size_t i = 0; i + 1 < present.size(); ++i)
      if (!is_prefix(present[i].first, present[i + 1].first))
        return PathViolation{dep, present[i].second, present[i + 1].second};
  }
  return std::nullopt;
}

void validate_ftree(const FTree& tree) {
  if (tree.roots.empty()) throw SemanticError("f-tree has no nodes");
  std::set<std::string> nodeClasses;
  for_each_node(tree, [&](const FNode& n, const NodePath& p) {
    if (n.classes.empty()) throw SemanticError("node without classes");
    if (n.constant && (!n.children.empty() || p.size() != 1))
      throw SemanticError("constant node must be a childless root");
    for (const AttributeClass& c : n.classes) {
      if (c.members.empty()) throw SemanticError("class without members");
      if (!nodeClasses.insert(c.id).second)
        throw SemanticError("class " + c.id + " labels more than one node");
    }
  });

  std::set<std::string> depClasses;
  for (const DependencySet& dep : tree.deps)
    for (const std::string& id : dep.classes) {
      depClasses.insert(id);
      if (!nodeClasses.count(id))
        throw SemanticError("dependency set " + dep.source +
                            " references missing class " + id);
    }
  for (const std::string& id : nodeClasses)
    if (!depClasses.count(id))
      throw SemanticError("class " + id + " is covered by no dependency set");

  if (auto v = check_path_constraint(tree))
    throw SemanticError("path constraint violated: dependency set " + v->dep.source +
                        " has incomparable classes " + v->classA + " and " + v->classB);
}

bool is_normalised(const FTree& tree) {
  DepMasks masks(tree);
  bool ok = true;
  for_each_node(tree, [&](const FNode& n, const NodePath&) {
    for (const FNode& child : n.children)
      if ((masks.of_node(n) & masks.of_subtree(child)) == 0) ok = false;
  });
  return ok;
}

namespace {

// Mutable scaffolding for normalisation: stable integer ids survive the
// reparenting that invalidates FNode pointers.
struct Arena {
  struct Rec {
    std::vector<AttributeClass> classes;
    bool constant = false;
    bool marked = false;
    std::vector<int> children;
    int parent = -1;
  };
  std::vector<Rec> recs;
  std::vector<int> roots;

  int add(const FNode& n, int parent) {
    int id = static_cast<int>(recs.size());
    recs.push_back({n.classes, n.constant, n.marked, {}, parent});
    for (const FNode& c : n.children) {
      int cid = add(c, id);
      recs[id].children.push_back(cid);
    }
    return id;
  }

  FNode build(int id) const {
    const Rec& r = recs[id];
    FNode n{r.classes, r.constant, r.marked, {}};
    for (int c : r.children) n.children.push_back(build(c));
    return n;
  }
};

}  // namespace

FTree normalise_tree(const FTree& tree, std::vector<std::string>* pushupLog) {
  DepMasks masks(tree);
  Arena arena;
  for (const FNode& r : tree.roots) arena.roots.push_back(arena.add(r, -1));

  auto node_mask = [&](int id) {
    std::uint64_t m = 0;
    for (const AttributeClass& c : arena.recs[id].classes) m |= masks.of_class(c.id);
    return m;
  };
  std::function<std::uint64_t(int)> subtree_mask = [&](int id) {
    std::uint64_t m = node_mask(id);
    for (int c : arena.recs[id].children) m |= subtree_mask(c);
    return m;
  };

  // Bottom-up over the initial shape: deepest first, earlier sibling
  // subtrees first among equal depths.  Subtrees only lose nodes as
  // others push up past them, so one pass suffices.
  std::vector<std::pair<int, int>> order;  // (depth, id); ids are DFS-ordered
  std::function<void(int, int)> collect = [&](int id, int depth) {
    order.emplace_back(depth, id);
    for (int c : arena.recs[id].children) collect(c, depth + 1);
  };
  for (int r : arena.roots) collect(r, 0);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  for (auto [depth, id] : order) {
    for (;;) {
      int p = arena.recs[id].parent;
      if (p < 0) break;
      if (node_mask(p) & subtree_mask(id)) break;
      int g = arena.recs[p].parent;
      auto& fromKids = arena.recs[p].children;
      fromKids.erase(std::find(fromKids.begin(), fromKids.end(), id));
      auto& toKids = g < 0 ? arena.roots : arena.recs[g].children;
      toKids.insert(std::find(toKids.begin(), toKids.end(), p), id);
      arena.recs[id].parent = g;
      if (pushupLog) pushupLog->push_back(arena.recs[id].classes.front().id);
    }
  }

  FTree out;
  out.deps = tree.deps;
  for (int r : arena.roots) out.roots.push_back(arena.build(r));
  return out;
}

namespace detail {

Rational cover_cost(const std::vector<std::uint64_t>& constraints,
                    std::size_t nvars, CostMode mode) {
  if (constraints.empty()) return Rational(0);
  if (mode == CostMode::Integral) {
    if (nvars > 20) throw BudgetError("integral cover over more than 20 relations");
    int best = -1;
    for (std::uint64_t s = 0; s < (std::uint64_t(1) << nvars); ++s) {
      int pc = __builtin_popcountll(s);
      if (best >= 0 && pc >= best) continue;
      bool ok = true;
      for (std::uint64_t m : constraints)
        if ((s & m) == 0) {
          ok = false;
          break;
        }
      if (ok) best = pc;
    }
    if (best < 0) throw SemanticError("uncoverable path (class with no relation)");
    return Rational(best);
  }
  std::vector<std::vector<Rational>> A;
  for (std::uint64_t m : constraints) {
    std::vector<Rational> row(nvars, Rational(0));
    for (std::size_t j = 0; j < nvars; ++j)
      if (m & (std::uint64_t(1) << j)) row[j] = Rational(1);
    A.push_back(std::move(row));
  }
  std::vector<Rational> b(constraints.size(), Rational(1));
  std::vector<Rational> c(nvars, Rational(1));
  return lp_minimize(A, b, c).objective;
}

}  // namespace detail

Rational s_cost(const FTree& tree, CostMode mode) {
  DepMasks masks(tree);
  const std::size_t nvars = tree.deps.size();
  Rational best(0);
  std::map<std::set<std::uint64_t>, Rational> cache;

  std::function<void(const FNode&, std::set<std::uint64_t>)> walk =
      [&](const FNode& n, std::set<std::uint64_t> cons) {
        if (!n.constant) {
          std::uint64_t m = masks.of_node(n);
          if (m == 0)
            throw SemanticError("class " + n.classes.front().id +
                                " is covered by no dependency set");
          cons.insert(m);
        }
        if (n.children.empty()) {
          auto it = cache.find(cons);
          Rational cost = it != cache.end()
                              ? it->second
                              : cache[cons] = detail::cover_cost(
                                    {cons.begin(), cons.end()}, nvars, mode);
          if (cost > best) best = cost;
          return;
        }
        for (const FNode& c : n.children) walk(c, cons);
      };
  for (const FNode& r : tree.roots) walk(r, {});
  return best;
}

double size_estimate(const FTree& tree, const Catalogue& stats,
                     const std::map<std::string, std::string>& aliases) {
  auto resolve = [&](const std::string& atom) -> const std::string& {
    auto it = aliases.find(atom);
    return it == aliases.end() ? atom : it->second;
  };
  auto distinct_of = [&](const Attribute& a) {
    std::string key = resolve(a.atom) + "." + a.column;
    auto it = stats.distinctCount.find(key);
    if (it == stats.distinctCount.end())
      throw SemanticError("missing distinct-count statistic for " + key);
    return static_cast<double>(it->second);
  };
  auto rows_of = [&](const std::string& source) {
    auto it = stats.rowCount.find(resolve(source));
    if (it == stats.rowCount.end())
      throw SemanticError("missing row-count statistic for " + source);
    return static_cast<double>(it->second);
  };
  auto node_v = [&](const FNode& n) {
    double v = std::numeric_limits<double>::infinity();
    for (const AttributeClass& c : n.classes)
      for (const Attribute& a : c.members) v = std::min(v, distinct_of(a));
    return v;
  };

  DepMasks masks(tree);
  double total = 0;

  struct Step {
    double v;
    std::uint64_t mask;
  };
  std::function<void(const FNode&, std::vector<Step>)> walk =
      [&](const FNode& n, std::vector<Step> prefix) {
        if (n.constant) {
          total += static_cast<double>(n.classes.size());
          return;
        }
        prefix.push_back({node_v(n), masks.of_node(n)});

        double prodV = 1;
        std::uint64_t cover = 0;
        for (const Step& s : prefix) {
          prodV *= s.v;
          cover |= s.mask;
        }
        double systemR = 1;
        for (std::size_t i = 0; i < tree.deps.size(); ++i)
          if (cover & (std::uint64_t(1) << i))
            systemR *= rows_of(tree.deps[i].source);
        for (const Step& s : prefix) {
          int k = __builtin_popcountll(s.mask);
          if (k > 1) {
            if (s.v == 0) {
              systemR = 0;
              break;
            }
            systemR /= std::pow(s.v, k - 1);
          }
        }
        total += static_cast<double>(n.classes.size()) * std::min(prodV, systemR);
        for (const FNode& c : n.children) walk(c, prefix);
      };
  for (const FNode& r : tree.roots) walk(r, {});
  return total;
}

std::size_t exact_size(const FTree& tree, const Database& db, const Query& query) {
  Query full = query;
  full.projection.clear();
  FlatResult flat = eval_flat(db, full);

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < flat.schema.size(); ++i) column[flat.schema[i]] = i;

  std::size_t total = 0;
  std::function<void(const FNode&, std::vector<std::size_t>)> walk =
      [&](const FNode& n, std::vector<std::size_t> cols) {
        auto it = column.find(n.classes.front().id);
        if (it == column.end())
          throw SemanticError("tree class " + n.classes.front().id +
                              " is not produced by the query");
        cols.push_back(it->second);

        std::set<std::vector<Value>> seen;
        for (const auto& row : flat.rows) {
          std::vector<Value> key;
          key.reserve(cols.size());
          for (std::size_t c : cols) key.push_back(row[c]);
          seen.insert(std::move(key));
        }
        total += n.classes.size() * seen.size();
        for (const FNode& c : n.children) walk(c, cols);
      };
  for (const FNode& r : tree.roots) walk(r, {});
  return total;
}

namespace {

void serialize_node(const FNode& n, std::string& out) {
  out += "(node (attrs";
  for (const Attribute& a : node_attributes(n)) {
    out += ' ';
    out += a.qualified();
  }
  out += ')';
  if (n.constant) out += " (const)";
  out += " (children";
  for (const FNode& c : n.children) {
    out += ' ';
    serialize_node(c, out);
  }
  out += "))";
}

}  // namespace

std::string serialize_ftree(const FTree& tree) {
  std::string out = "(ftree (deps";
  for (const DependencySet& d : tree.deps) {
    out += " (";
    out += d.source;
    for (const std::string& id : d.classes) {
      out += ' ';
      out += id;
    }
    out += ')';
  }
  out += ") (forest";
  for (const FNode& r : tree.roots) {
    out += ' ';
    serialize_node(r, out);
  }
  out += "))";
  return out;
}

namespace {

std::string canonical_node(const FNode& n) {
  std::vector<std::string> ids;
  for (const AttributeClass& c : n.classes) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  std::string out = "(node (attrs";
  for (const std::string& id : ids) {
    // Class ids already list their members sorted and '='-joined; reuse
    // the member spelling for the attrs list.
    std::string member;
    for (char ch : id) {
      if (ch == '=') {
        out += ' ';
        out += member;
        member.clear();
      } else {
        member += ch;
      }
    }
    out += ' ';
    out += member;
  }
  out += ')';
  if (n.constant) out += " (const)";
  out += " (children";
  std::vector<std::string> kids;
  for (const FNode& c : n.children) kids.push_back(canonical_node(c));
  std::sort(kids.begin(), kids.end());
  for (const std::string& k : kids) {
    out += ' ';
    out += k;
  }
  out += "))";
  return out;
}

}  // namespace

std::string canonical_form(const FTree& tree) {
  std::vector<std::string> deps;
  for (const DependencySet& d : tree.deps) {
    std::string s = "(" + d.source;
    for (const std::string& id : d.classes) s += ' ' + id;
    s += ')';
    deps.push_back(std::move(s));
  }
  std::sort(deps.begin(), deps.end());
  std::vector<std::string> roots;
  for (const FNode& r : tree.roots) roots.push_back(canonical_node(r));
  std::sort(roots.begin(), roots.end());

  std::string out = "(ftree (deps";
  for (const std::string& d : deps) {
    out += ' ';
    out += d;
  }
  out += ") (forest";
  for (const std::string& r : roots) {
    out += ' ';
    out += r;
  }
  out += "))";
  return out;
}

namespace {

using detail::Sexpr;

[[noreturn]] void bad_shape(const Sexpr& e, const std::string& what) {
  throw ParseError(std::to_string(e.line) + ":" + std::to_string(e.col) + ": " + what);
}

bool is_head(const Sexpr& e, const char* word) {
  return e.is_list && !e.items.empty() && !e.items[0].is_list &&
         e.items[0].atom == word;
}

FNode parse_node(const Sexpr& e,
                 const std::map<std::string, AttributeClass>& classes) {
  if (!is_head(e, "node")) bad_shape(e, "expected (node ...)");
  std::vector<Attribute> attrs;
  bool constant = false;
  std::vector<FNode> children;
  bool sawAttrs = false;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const Sexpr& part = e.items[i];
    if (is_head(part, "attrs")) {
      sawAttrs = true;
      for (std::size_t j = 1; j < part.items.size(); ++j) {
        if (part.items[j].is_list) bad_shape(part.items[j], "expected attribute");
        attrs.push_back(parse_attribute(part.items[j].atom));
      }
    } else if (is_head(part, "const")) {
      constant = true;
    } else if (is_head(part, "children")) {
      for (std::size_t j = 1; j < part.items.size(); ++j)
        children.push_back(parse_node(part.items[j], classes));
    } else {
      bad_shape(part, "expected (attrs ...), (const) or (children ...)");
    }
  }
  if (!sawAttrs || attrs.empty()) bad_shape(e, "node needs attributes");

  // Recover the node's classes: every class whose members all appear here
  // belongs to the node, ordered by first member occurrence, and together
  // they must account for every listed attribute.
  std::set<Attribute> attrSet(attrs.begin(), attrs.end());
  auto position = [&](const AttributeClass& c) {
    std::size_t best = attrs.size();
    for (std::size_t i = 0; i < attrs.size(); ++i)
      if (std::find(c.members.begin(), c.members.end(), attrs[i]) != c.members.end())
        best = std::min(best, i);
    return best;
  };
  std::vector<const AttributeClass*> mine;
  std::size_t covered = 0;
  for (const auto& [id, c] : classes) {
    bool all = true;
    for (const Attribute& m : c.members)
      if (!attrSet.count(m)) {
        all = false;
        break;
      }
    if (all && position(c) < attrs.size()) {
      mine.push_back(&c);
      covered += c.members.size();
    }
  }
  if (covered != attrSet.size())
    throw SemanticError("node attrs of " + attrs[0].qualified() +
                        "... do not line up with the dependency-set classes");
  std::sort(mine.begin(), mine.end(),
            [&](const AttributeClass* a, const AttributeClass* b) {
              return position(*a) < position(*b);
            });

  FNode node;
  node.constant = constant;
  for (const AttributeClass* c : mine) node.classes.push_back(*c);
  node.children = std::move(children);
  return node;
}

}  // namespace

FTree parse_ftree(const std::string& text) {
  Sexpr top = detail::parse_sexpr(text);
  if (!is_head(top, "ftree")) bad_shape(top, "expected (ftree ...)");

  FTree tree;
  std::map<std::string, AttributeClass> classes;
  const Sexpr* forest = nullptr;

  for (std::size_t i = 1; i < top.items.size(); ++i) {
    const Sexpr& part = top.items[i];
    if (is_head(part, "deps")) {
      for (std::size_t j = 1; j < part.items.size(); ++j) {
        const Sexpr& d = part.items[j];
        if (!d.is_list || d.items.empty() || d.items[0].is_list)
          bad_shape(d, "expected (SOURCE classid ...)");
        DependencySet dep;
        dep.source = d.items[0].atom;
        for (std::size_t k = 1; k < d.items.size(); ++k) {
          if (d.items[k].is_list) bad_shape(d.items[k], "expected class id");
          const std::string& id = d.items[k].atom;
          std::vector<Attribute> members;
          std::string piece;
          for (char ch : id + "=") {
            if (ch == '=') {
              members.push_back(parse_attribute(piece));
              piece.clear();
            } else {
              piece += ch;
            }
          }
          AttributeClass cls = AttributeClass::of(members);
          if (cls.id != id)
            throw SemanticError("class id '" + id + "' is not in canonical order");
          classes.emplace(cls.id, cls);
          dep.classes.push_back(cls.id);
        }
        std::sort(dep.classes.begin(), dep.classes.end());
        dep.classes.erase(std::unique(dep.classes.begin(), dep.classes.end()),
                          dep.classes.end());
        tree.deps.push_back(std::move(dep));
      }
    } else if (is_head(part, "forest")) {
      forest = &part;
    } else {
      bad_shape(part, "expected (deps ...) or (forest ...)");
    }
  }
  if (!forest) bad_shape(top, "missing (forest ...)");
  for (std::size_t j = 1; j < forest->items.size(); ++j)
    tree.roots.push_back(parse_node(forest->items[j], classes));

  validate_ftree(tree);
  return tree;
}

FTree pushup_one_level(const FTree& tree, const std::string& classId) {
  auto path = find_class(tree, classId);
  if (!path) throw SemanticError("no node carries class " + classId);
  if (path->size() < 2)
    throw SemanticError("cannot push up a root (class " + classId + ")");

  const FNode& moving = node_at(tree, *path);
  NodePath parentPath(path->begin(), path->end() - 1);
  const FNode& parent = node_at(tree, parentPath);
  if (dependent(tree, parent, subtree_class_ids(moving)))
    throw SemanticError("push-up of " + classId +
                        " violates dependence on its parent");

  FTree out = tree;
  FNode lifted = node_at(out, *path);
  FNode& p = node_at(out, parentPath);
  p.children.erase(p.children.begin() + static_cast<std::ptrdiff_t>(path->back()));

  auto& siblings = parentPath.size() == 1
                       ? out.roots
                       : node_at(out, NodePath(parentPath.begin(), parentPath.end() - 1))
                             .children;
  siblings.insert(siblings.begin() + static_cast<std::ptrdiff_t>(parentPath.back()),
                  std::move(lifted));
  return out;
}

}  // namespace fdb
