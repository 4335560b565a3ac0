#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdb/value.hpp"

namespace fdb {

/// A column of one query atom, written R.A.  Atoms are named per query, so
/// self-joins yield distinct attributes over the same stored relation.
struct Attribute {
  std::string atom;
  std::string column;

  std::string qualified() const { return atom + "." + column; }
  auto operator<=>(const Attribute&) const = default;
};

/// Equivalence class of attributes under the transitive closure of the
/// query's attr=attr conditions.  The id is the sorted member list joined
/// by '='; ids are the stable way classes are referenced by trees and
/// dependency sets.
struct AttributeClass {
  std::string id;
  std::vector<Attribute> members;  // sorted, non-empty

  static AttributeClass of(std::vector<Attribute> members);
  auto operator<=>(const AttributeClass&) const = default;
};

/// The classes contributed by one relation atom.  After a projection
/// removes a class that linked several sets, the survivors are united and
/// the source names are joined with '+'.
struct DependencySet {
  std::string source;
  std::vector<std::string> classes;  // sorted class ids
};

enum class Domain { Integer, String };

/// Flat relation: header-declared schema plus row-major value storage.
/// Columns are domain-homogeneous; the first data row fixes each domain.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t arity() const { return columns_.size(); }
  std::size_t row_count() const { return arity() ? data_.size() / arity() : 0; }

  const Value& at(std::size_t row, std::size_t col) const {
    return data_[row * columns_.size() + col];
  }
  std::vector<Value> row(std::size_t r) const;
  /// Index of the named column, or nullopt.
  std::optional<std::size_t> column_index(const std::string& name) const;
  Domain domain(std::size_t col) const { return domains_[col]; }

  /// Appends a row; throws SemanticError on arity or domain mismatch.
  void add_row(const std::vector<Value>& row);

  /// Number of distinct values in a column (exact, recomputed).
  std::size_t distinct_count(std::size_t col) const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<Domain> domains_;  // valid once a first row exists
  std::vector<Value> data_;
};

/// Exact-by-default statistics; entries may be overridden from a stats
/// file for what-if estimation.
struct Catalogue {
  std::map<std::string, std::size_t> rowCount;       // relation name
  std::map<std::string, std::size_t> distinctCount;  // "R.A"

  void record(const Relation& r);
  /// Lines `R<TAB>count` or `R.A<TAB>count`; '#' comments allowed.
  void apply_override_file(const std::string& path);
};

class Database {
 public:
  /// Takes ownership; throws SemanticError on duplicate relation name.
  void add(Relation r);
  /// Loads every *.tsv file in the directory.
  void load_directory(const std::string& dir);

  const Relation& relation(const std::string& name) const;
  bool has_relation(const std::string& name) const { return rels_.count(name) != 0; }
  const std::map<std::string, Relation>& relations() const { return rels_; }

  /// Total number of values stored across all relations (|D|).
  std::size_t total_values() const;

  Catalogue& stats() { return stats_; }
  const Catalogue& stats() const { return stats_; }

 private:
  std::map<std::string, Relation> rels_;
  Catalogue stats_;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string to_string(CmpOp op);
CmpOp parse_cmp_op(const std::string& tok);
bool eval_cmp(const Value& lhs, CmpOp op, const Value& rhs);

struct QueryAtom {
  std::string name;                  // unique within the query
  std::string relation;              // stored relation it reads
  std::vector<std::string> columns;  // declared columns, checked at bind
};

struct ConstPredicate {
  Attribute attr;
  CmpOp op;
  Value constant;
};

/// Select-project-join query: equi-joins, constant comparisons, and an
/// optional projection list (empty = keep everything).
struct Query {
  std::vector<QueryAtom> atoms;
  std::vector<std::pair<Attribute, Attribute>> equalities;
  std::vector<ConstPredicate> constants;
  std::vector<Attribute> projection;

  const QueryAtom* find_atom(const std::string& name) const;
  /// All attributes of all atoms, in atom-then-column order.
  std::vector<Attribute> all_attributes() const;
  /// Throws SemanticError if atoms, columns, or referenced attributes do
  /// not line up with the database schemas.
  void bind(const Database& db) const;
};

/// Parses one relation file (see docs/formats.md).  Header row names the
/// relation and its columns; errors carry file:line:column positions.
Relation load_relation(const std::string& path);

/// True when the class id (member attributes joined with '=') lists the
/// qualified attribute.
bool class_contains(const std::string& classId, const std::string& attr);

/// Partition of the query's attributes into transitive equality classes,
/// sorted by class id.
std::vector<AttributeClass> equivalence_classes(const Query& q);

/// One dependency set per atom, in atom order, referencing class ids.
std::vector<DependencySet> dependency_sets(
    const Query& q, const std::vector<AttributeClass>& classes);

}  // namespace fdb
