#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fdb/catalog.hpp"
#include "fdb/errors.hpp"
#include "fdb/ftree.hpp"
#include "fdb/value.hpp"

namespace fdb {

enum class FKind { Empty, Nullary, Union, Product };

struct FExpr;
using FExprPtr = std::shared_ptr<const FExpr>;

/// One node of a factorised expression.  Expressions are immutable once
/// built; operators share unchanged subexpressions between input and
/// output.  A shared pointer reached via several paths stands for that
/// subexpression written out once per path, so sizes and counts are
/// computed over the unfolding.
struct FExpr {
  FKind kind = FKind::Empty;

  /// Union only: number of classes on the owning f-tree node.  Each
  /// group emits one singleton per class, all with the group's value.
  std::size_t classCount = 1;

  /// Union only, values strictly ascending; a null child marks a group
  /// below a childless node.
  std::vector<std::pair<Value, FExprPtr>> groups;

  /// Product only, at least two factors.
  std::vector<FExprPtr> factors;

  static FExprPtr empty();
  static FExprPtr nullary();
  static FExprPtr make_union(std::size_t classCount,
                             std::vector<std::pair<Value, FExprPtr>> groups);
  static FExprPtr make_product(std::vector<FExprPtr> factors);
};

/// Smart product constructor: flattens nested products, drops to the
/// single factor or Nullary when fewer than two remain, and collapses
/// to Empty if any factor is Empty.
FExprPtr product_of(std::vector<FExprPtr> factors);

/// Unpacks a union group's child into one factor per tree child:
/// null -> none, product -> its factors, anything else -> itself.
std::vector<FExprPtr> child_factors(const FExprPtr& groupChild);

/// A factorised representation tied to its f-tree.  The expression
/// nests exactly like the tree: one union per node, one product per
/// forest of two or more subtrees.
struct FRep {
  FTree tree;
  FExprPtr root;
};

/// Builds the canonical f-representation of the query's join over the
/// given tree.  Each relation is sorted once by its classes in
/// root-to-leaf order; candidate values at a node are the intersection
/// of the covering relations' values under the ancestor bindings, and
/// a value whose subtree comes out empty is dropped.  Constant
/// predicates and projections of `query` are ignored here; they are
/// applied by the select and project operators.
FRep factorise(const Database& db, const Query& query, const FTree& tree,
               const Deadline& deadline = {});

/// Number of represented tuples, without enumerating them.
std::size_t count_tuples(const FExprPtr& expr);

/// Number of singletons in the (unfolded) expression.
std::size_t rep_size(const FExprPtr& expr);
inline std::size_t rep_size(const FRep& rep) { return rep_size(rep.root); }

/// Class ids in tuple column order: depth-first over the forest, node
/// classes before children.
std::vector<std::string> tuple_schema(const FTree& tree);

/// Streams the represented tuples in nested-union order, which is
/// lexicographic over the depth-first column order.  Preparation walks
/// one root-to-leaf choice; advancing re-descends at most one branch,
/// so the delay is proportional to the column count.
class TupleIterator {
 public:
  struct Frame {
    const FExpr* node;  // union
    std::size_t pick;
  };

  explicit TupleIterator(FExprPtr root);

  bool done() const { return done_; }
  const std::vector<Value>& tuple() const { return tuple_; }
  void advance();

 private:
  void rebuild_tuple();

  FExprPtr root_;
  std::vector<Frame> frames_;
  std::vector<Value> tuple_;
  bool done_ = false;
};

/// Materialises every tuple; convenience for tests and small outputs.
std::vector<std::vector<Value>> enumerate_all(const FExprPtr& expr);

std::string serialize_frep(const FExprPtr& expr);
inline std::string serialize_frep(const FRep& rep) {
  return serialize_frep(rep.root);
}

/// Parses the text and checks it against the tree: union per node,
/// ascending group values, products only under forests, single-group
/// unions on constant nodes.
FRep parse_frep(const std::string& text, const FTree& tree);

/// Re-checks the conformance invariants on an existing representation.
void validate_frep(const FRep& rep);

}  // namespace fdb
