#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdb/catalog.hpp"
#include "fdb/rational.hpp"

namespace fdb {

/// Node of a factorisation tree.  A node usually carries one attribute
/// class; merge and absorb append further classes, and every class then
/// emits its own singleton per union group.  `constant` marks a childless
/// root hoisted by an equality selection with a constant: such nodes are
/// ignored by costing and by the path constraint.  `marked` is transient
/// state of the projection protocol.
struct FNode {
  std::vector<AttributeClass> classes;
  bool constant = false;
  bool marked = false;
  std::vector<FNode> children;
};

/// Unordered rooted forest over the attribute classes of a query; child
/// order is presentation only.  Dependency sets induce the path
/// constraint: all classes of one set must lie on one root-to-leaf path.
struct FTree {
  std::vector<FNode> roots;
  std::vector<DependencySet> deps;
};

/// Path from a root to a node: roots index followed by child indices.
using NodePath = std::vector<std::size_t>;

const FNode& node_at(const FTree& tree, const NodePath& path);
FNode& node_at(FTree& tree, const NodePath& path);

/// Class ids carried by one node, in the node's class order.
std::vector<std::string> class_ids(const FNode& node);
/// All class ids in the subtree rooted at node.
std::vector<std::string> subtree_class_ids(const FNode& node);
/// All attributes of the node, concatenating its classes in order.
std::vector<Attribute> node_attributes(const FNode& node);

/// Locates the node carrying the given class, if any.
std::optional<NodePath> find_class(const FTree& tree, const std::string& classId);

/// True iff some dependency set contains a class of `node` and one of
/// `subtreeIds`.  Drives push-up legality and swap child classification.
bool dependent(const FTree& tree, const FNode& node,
               const std::vector<std::string>& subtreeIds);

struct PathViolation {
  DependencySet dep;
  std::string classA, classB;  // incomparable under the ancestor order
};

/// Checks the path constraint; classes on constant nodes are exempt.
std::optional<PathViolation> check_path_constraint(const FTree& tree);

/// Checks that every class labels exactly one node and that the path
/// constraint holds; throws SemanticError otherwise.
void validate_ftree(const FTree& tree);

/// True iff no node can be pushed up: every non-root node's parent is
/// dependent on it or on one of its descendants.
bool is_normalised(const FTree& tree);

/// Pushes every node up as far as dependencies allow, bottom-up.  Tree
/// part of the normalisation operator; the paired representation rewrite
/// lives with the operators.  If `pushupLog` is given, the first class id
/// of the moved node is appended once per single-level hoist, in order.
FTree normalise_tree(const FTree& tree,
                     std::vector<std::string>* pushupLog = nullptr);

/// One-level push-up: the node carrying classId becomes a sibling of its
/// former parent, inserted just before it.  Requires a non-root node
/// whose parent is not dependent on the node's subtree.
FTree pushup_one_level(const FTree& tree, const std::string& classId);

enum class CostMode { Fractional, Integral };

/// s(T): maximum over root-to-leaf paths of the edge cover optimum.  Each
/// non-constant node on the path contributes one covering constraint; a
/// dependency set covers a node if it contains any of the node's classes.
/// Fractional mode solves the LP exactly; integral mode restricts weights
/// to {0,1}.  Empty forest costs 0.
Rational s_cost(const FTree& tree, CostMode mode = CostMode::Fractional);

namespace detail {
/// Covering program behind s_cost: minimise the total weight put on
/// dependency sets so that every constraint mask (bit i = set i counts)
/// receives weight >= 1.  Integral mode restricts weights to {0,1}.
/// Exposed for the f-tree search, which costs partial paths directly.
Rational cover_cost(const std::vector<std::uint64_t>& constraints,
                    std::size_t nvars, CostMode mode);
}  // namespace detail

/// Catalogue-based estimate of the singleton count of a factorisation
/// over this tree.  Formula, per node n with ancestor-path nodes P(n)
/// (root to n inclusive, constants skipped):
///
///   est(n)   = min( prod_{m in P(n)} V(m),  systemR(P(n)) )
///   total    = sum_n |classes(n)| * est(n)    (constant nodes count 1)
///
/// where V(m) = min over the classes of m of the smallest distinctCount
/// among class members, and systemR(P) multiplies the row counts of all
/// relations covering P and divides by V(m)^(cover(m)-1) per node, with
/// cover(m) = number of those relations covering m.  Uniformity and
/// independence assumptions throughout; deterministic by construction.
///
/// `aliases` maps atom names to stored relation names where they differ.
/// Missing statistics raise SemanticError.
double size_estimate(const FTree& tree, const Catalogue& stats,
                     const std::map<std::string, std::string>& aliases = {});

/// Exact singleton count of the factorisation of `query` over `tree`:
/// sum over nodes of |classes| times the number of distinct ancestor-path
/// projections of the flat result.  Uses the baseline engine; the query's
/// own projection list is ignored (the tree says what is kept).
std::size_t exact_size(const FTree& tree, const Database& db, const Query& query);

/// Text form, preserving stored child order:
///   (ftree (deps (SRC id ...) ...) (forest NODE ...))
///   NODE := (node (attrs R.A ...) (const)? (children NODE ...))
std::string serialize_ftree(const FTree& tree);

/// Identity modulo child order: like serialize_ftree but with classes,
/// children, and roots sorted.  Search states and tie-breaks use this.
std::string canonical_form(const FTree& tree);

/// Parses the text form (whitespace-insensitive) and validates the
/// result.  Class membership is reconstructed from the dependency sets.
FTree parse_ftree(const std::string& text);

}  // namespace fdb
