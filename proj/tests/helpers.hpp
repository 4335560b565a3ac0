#pragma once

#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdb/baseline.hpp"
#include "fdb/catalog.hpp"
#include "fdb/frep.hpp"
#include "fdb/ftree.hpp"

namespace fdbtest {

inline std::string testdata_dir() {
  const char* env = std::getenv("FDB_TESTDATA");
  if (!env) throw std::runtime_error("FDB_TESTDATA is not set");
  return env;
}

inline fdb::Database grocery_db() {
  fdb::Database db;
  db.load_directory(testdata_dir() + "/grocery");
  return db;
}

inline fdb::QueryAtom atom(const std::string& name,
                           std::vector<std::string> cols) {
  return {name, name, std::move(cols)};
}

/// Orders join Store on item join Disp on location.
inline fdb::Query grocery_q1() {
  fdb::Query q;
  q.atoms = {atom("Orders", {"oid", "item"}), atom("Store", {"location", "item"}),
             atom("Disp", {"dispatcher", "location"})};
  q.equalities = {{{"Orders", "item"}, {"Store", "item"}},
                  {{"Store", "location"}, {"Disp", "location"}}};
  return q;
}

/// Produce join Serve on supplier.
inline fdb::Query grocery_q2() {
  fdb::Query q;
  q.atoms = {atom("Produce", {"supplier", "item"}),
             atom("Serve", {"supplier", "location"})};
  q.equalities = {{{"Produce", "supplier"}, {"Serve", "supplier"}}};
  return q;
}

/// All five grocery relations, joined on item and the two join keys of
/// the running queries; the extra location equality is optional.
inline fdb::Query grocery_q_all(bool joinLocations) {
  fdb::Query q;
  q.atoms = {atom("Orders", {"oid", "item"}), atom("Store", {"location", "item"}),
             atom("Disp", {"dispatcher", "location"}),
             atom("Produce", {"supplier", "item"}),
             atom("Serve", {"supplier", "location"})};
  q.equalities = {{{"Orders", "item"}, {"Store", "item"}},
                  {{"Store", "location"}, {"Disp", "location"}},
                  {{"Produce", "supplier"}, {"Serve", "supplier"}},
                  {{"Orders", "item"}, {"Produce", "item"}}};
  if (joinLocations)
    q.equalities.push_back({{"Store", "location"}, {"Serve", "location"}});
  return q;
}

struct Shape {
  std::string attr;  // column name, or qualified R.A when ambiguous
  std::vector<Shape> kids;
};

/// Builds an f-tree for the query with the given nesting; each Shape
/// names its node's class by one member attribute.
inline fdb::FTree make_tree(const fdb::Query& q, const std::vector<Shape>& roots) {
  auto classes = fdb::equivalence_classes(q);
  auto lookup = [&](const std::string& name) -> const fdb::AttributeClass& {
    const fdb::AttributeClass* found = nullptr;
    for (const auto& c : classes)
      for (const auto& m : c.members)
        if (m.qualified() == name || m.column == name) {
          if (found && found != &c)
            throw std::runtime_error("ambiguous attribute " + name);
          found = &c;
        }
    if (!found) throw std::runtime_error("no class for " + name);
    return *found;
  };
  std::function<fdb::FNode(const Shape&)> build = [&](const Shape& s) {
    fdb::FNode n;
    n.classes = {lookup(s.attr)};
    for (const Shape& k : s.kids) n.children.push_back(build(k));
    return n;
  };
  fdb::FTree t;
  for (const Shape& s : roots) t.roots.push_back(build(s));
  t.deps = fdb::dependency_sets(q, classes);
  return t;
}

inline fdb::FTree grocery_t1() {
  return make_tree(grocery_q1(),
                   {{"item", {{"oid", {}}, {"location", {{"dispatcher", {}}}}}}});
}

inline fdb::FTree grocery_t2() {
  return make_tree(grocery_q1(),
                   {{"location", {{"item", {{"oid", {}}}}, {"dispatcher", {}}}}});
}

inline fdb::FTree grocery_t3() {
  return make_tree(grocery_q2(), {{"supplier", {{"item", {}}, {"location", {}}}}});
}

inline fdb::FTree grocery_t4() {
  return make_tree(grocery_q2(), {{"item", {{"supplier", {{"location", {}}}}}}});
}

inline fdb::FTree grocery_t5() {
  return make_tree(
      grocery_q_all(false),
      {{"item",
        {{"oid", {}},
         {"Store.location", {{"dispatcher", {}}}},
         {"supplier", {{"Serve.location", {}}}}}}});
}

inline fdb::FTree grocery_t6() {
  return make_tree(
      grocery_q_all(true),
      {{"item",
        {{"oid", {}},
         {"Store.location", {{"dispatcher", {}}, {"supplier", {}}}}}}});
}

inline std::vector<std::string> split_eq(const std::string& id) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto at = id.find('=', pos);
    if (at == std::string::npos) {
      out.push_back(id.substr(pos));
      return out;
    }
    out.push_back(id.substr(pos, at - pos));
    pos = at + 1;
  }
}

/// Rows of the representation projected onto the given qualified
/// attributes, one value per attribute (class members repeat their
/// column's value).
inline std::set<std::vector<fdb::Value>> rep_rows_over(
    const fdb::FRep& rep, const std::vector<std::string>& attrs) {
  auto schema = fdb::tuple_schema(rep.tree);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < schema.size(); ++i)
    for (const auto& m : split_eq(schema[i])) col[m] = i;
  std::set<std::vector<fdb::Value>> out;
  for (const auto& row : fdb::enumerate_all(rep.root)) {
    std::vector<fdb::Value> r;
    r.reserve(attrs.size());
    for (const auto& a : attrs) r.push_back(row.at(col.at(a)));
    out.insert(std::move(r));
  }
  return out;
}

inline std::set<std::vector<fdb::Value>> flat_rows_over(
    const fdb::FlatResult& fr, const std::vector<std::string>& attrs) {
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fr.schema.size(); ++i)
    for (const auto& m : split_eq(fr.schema[i])) col[m] = i;
  std::set<std::vector<fdb::Value>> out;
  for (const auto& row : fr.rows) {
    std::vector<fdb::Value> r;
    r.reserve(attrs.size());
    for (const auto& a : attrs) r.push_back(row.at(col.at(a)));
    out.insert(std::move(r));
  }
  return out;
}

inline std::vector<std::string> query_attrs(const fdb::Query& q) {
  std::vector<std::string> out;
  for (const auto& a : q.all_attributes()) out.push_back(a.qualified());
  return out;
}

inline fdb::Relation make_rel(const std::string& name,
                              std::vector<std::string> cols,
                              const std::vector<std::vector<std::string>>& rows) {
  fdb::Relation r(name, std::move(cols));
  for (const auto& row : rows) {
    std::vector<fdb::Value> vs;
    for (const auto& s : row) vs.push_back(fdb::Value::parse(s));
    r.add_row(vs);
  }
  return r;
}

}  // namespace fdbtest
