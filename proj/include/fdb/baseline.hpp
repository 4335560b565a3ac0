#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fdb/catalog.hpp"
#include "fdb/errors.hpp"

namespace fdb {

/// Flat query result with one column per attribute class (the natural
/// join collapses equal columns), columns sorted by class id, rows sorted
/// and duplicate-free.
struct FlatResult {
  std::vector<std::string> schema;  // class ids
  std::vector<std::vector<Value>> rows;
};

/// Evaluates an SPJ query the conventional way: constant selections are
/// pushed into the scans, atoms are joined left-deep in ascending order
/// of the System-R size estimate (connected atoms preferred), each join
/// is a sort-merge join on the shared classes, and the projection runs
/// last with duplicate elimination.
FlatResult eval_flat(const Database& db, const Query& q,
                     const Deadline& deadline = {});

/// |distinct projection of Q(D) onto the given classes|; the query's own
/// projection list is ignored.
std::size_t ancestor_projection_count(const Database& db, const Query& q,
                                      const std::vector<std::string>& pathClassIds);

/// Writes a FlatResult in the relation file format under the given name.
std::string flat_to_relation_text(const FlatResult& r, const std::string& name);

}  // namespace fdb
