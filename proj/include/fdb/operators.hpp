#pragma once

#include <string>
#include <vector>

#include "fdb/frep.hpp"
#include "fdb/ftree.hpp"
#include "fdb/value.hpp"

namespace fdb {

/// The f-plan operator kinds, in trace spelling order.
enum class OpKind {
  Pushup,
  Normalise,
  Swap,
  Product,
  Merge,
  Absorb,
  SelectConst,
  Project,
};

std::string to_string(OpKind kind);

/// One executed plan step; trees recorded for tracing and validation.
struct OperatorApplication {
  OpKind kind;
  std::vector<std::string> args;
  FTree inTree;
  FTree outTree;
};

// Tree-only transforms; the optimizer searches over these without
// touching representations.  All preserve the path constraint, and all
// but tree_pushup preserve normalisation.

/// Moves the node carrying `classB` one level up, in front of its
/// former parent; the parent must not depend on B's subtree.
FTree tree_pushup(const FTree& tree, const std::string& classB);

/// Exchanges the node of `classB` with its parent (the node of
/// `classA`): B takes A's place, B's children that depend on A move
/// under A, the rest stay with B.
FTree tree_swap(const FTree& tree, const std::string& classA,
                const std::string& classB);

/// Merges the sibling nodes of `classA` and `classB` into one node at
/// A's position carrying both label sets and all children.
FTree tree_merge(const FTree& tree, const std::string& classA,
                 const std::string& classB);

/// Absorbs the node of `classB` into its proper ancestor (the node of
/// `classA`), splices B out, and normalises.
FTree tree_absorb(const FTree& tree, const std::string& classA,
                  const std::string& classB);

// Full operators on (tree, rep) pairs.  Inputs are never mutated;
// unchanged subexpressions are shared between input and output.

FRep op_pushup(const FRep& in, const std::string& classB);

/// Pushes every node as high as its dependencies allow, replaying the
/// same single-level hoists on the representation.
FRep op_normalise(const FRep& in);

FRep op_swap(const FRep& in, const std::string& classA,
             const std::string& classB);

/// Concatenates two representations over attribute-disjoint trees.
FRep op_product(const FRep& left, const FRep& right);

FRep op_merge(const FRep& in, const std::string& classA,
              const std::string& classB);

FRep op_absorb(const FRep& in, const std::string& classA,
               const std::string& classB);

/// Filters on `attr` (a qualified attribute or class id).  For
/// equality the selected node becomes a constant root and the tree is
/// renormalised; for other comparisons the tree is unchanged.
FRep op_select_const(const FRep& in, const std::string& attr, CmpOp op,
                     const Value& c);

/// Keeps only the classes containing one of `keepAttrs` (qualified
/// attributes or class ids).  Marked classes sharing a node with kept
/// ones are dropped in place; fully marked nodes are swapped down to
/// leaves and removed, merging their dependency sets to keep
/// transitive dependence; the result is renormalised.
FRep op_project(const FRep& in, const std::vector<std::string>& keepAttrs);

}  // namespace fdb
