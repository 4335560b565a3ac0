#include "fdb/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fdb/errors.hpp"

namespace fdb {

AttributeClass AttributeClass::of(std::vector<Attribute> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::string id;
  for (const Attribute& a : members) {
    if (!id.empty()) id += '=';
    id += a.qualified();
  }
  return AttributeClass{std::move(id), std::move(members)};
}

Relation::Relation(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    for (std::size_t j = i + 1; j < columns_.size(); ++j)
      if (columns_[i] == columns_[j])
        throw SemanticError("relation " + name_ + ": duplicate column " +
                            columns_[i]);
}

std::vector<Value> Relation::row(std::size_t r) const {
  return {data_.begin() + r * arity(), data_.begin() + (r + 1) * arity()};
}

std::optional<std::size_t> Relation::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  return std::nullopt;
}

void Relation::add_row(const std::vector<Value>& row) {
  if (row.size() != arity())
    throw SemanticError("relation " + name_ + ": row arity " +
                        std::to_string(row.size()) + " != schema arity " +
                        std::to_string(arity()));
  if (domains_.empty()) {
    for (const Value& v : row)
      domains_.push_back(v.is_string() ? Domain::String : Domain::Integer);
  } else {
    for (std::size_t i = 0; i < row.size(); ++i) {
      Domain d = row[i].is_string() ? Domain::String : Domain::Integer;
      if (d != domains_[i])
        throw SemanticError("relation " + name_ + ": mixed value domains in column " +
                            columns_[i]);
    }
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

std::size_t Relation::distinct_count(std::size_t col) const {
  std::vector<Value> vals;
  vals.reserve(row_count());
  for (std::size_t r = 0; r < row_count(); ++r) vals.push_back(at(r, col));
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals.size();
}

void Catalogue::record(const Relation& r) {
  rowCount[r.name()] = r.row_count();
  for (std::size_t c = 0; c < r.arity(); ++c)
    distinctCount[r.name() + "." + r.columns()[c]] = r.distinct_count(c);
}

void Catalogue::apply_override_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open stats file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected TAB");
    std::string key = line.substr(0, tab);
    std::size_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad count");
    }
    if (key.find('.') != std::string::npos)
      distinctCount[key] = count;
    else
      rowCount[key] = count;
  }
}

void Database::add(Relation r) {
  std::string name = r.name();
  if (rels_.count(name))
    throw SemanticError("duplicate relation " + name);
  stats_.record(r);
  rels_.emplace(std::move(name), std::move(r));
}

void Database::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw SemanticError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsv")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  for (const std::string& p : paths) add(load_relation(p));
}

const Relation& Database::relation(const std::string& name) const {
  auto it = rels_.find(name);
  if (it == rels_.end()) throw SemanticError("unknown relation " + name);
  return it->second;
}

std::size_t Database::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, r] : rels_) n += r.row_count() * r.arity();
  return n;
}

std::string to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

CmpOp parse_cmp_op(const std::string& tok) {
  if (tok == "=") return CmpOp::Eq;
  if (tok == "!=") return CmpOp::Ne;
  if (tok == "<") return CmpOp::Lt;
  if (tok == "<=") return CmpOp::Le;
  if (tok == ">") return CmpOp::Gt;
  if (tok == ">=") return CmpOp::Ge;
  throw ParseError("unknown comparison operator '" + tok + "'");
}

bool eval_cmp(const Value& lhs, CmpOp op, const Value& rhs) {
  switch (op) {
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Gt: return lhs > rhs;
    case CmpOp::Ge: return lhs >= rhs;
  }
  return false;
}

const QueryAtom* Query::find_atom(const std::string& name) const {
  for (const QueryAtom& a : atoms)
    if (a.name == name) return &a;
  return nullptr;
}

std::vector<Attribute> Query::all_attributes() const {
  std::vector<Attribute> out;
  for (const QueryAtom& a : atoms)
    for (const std::string& c : a.columns) out.push_back({a.name, c});
  return out;
}

namespace {

void check_attribute(const Query& q, const Attribute& attr,
                     const char* where) {
  const QueryAtom* a = q.find_atom(attr.atom);
  if (!a)
    throw SemanticError(std::string(where) + ": unknown atom " + attr.atom);
  if (std::find(a->columns.begin(), a->columns.end(), attr.column) ==
      a->columns.end())
    throw SemanticError(std::string(where) + ": atom " + attr.atom +
                        " has no column " + attr.column);
}

}  // namespace

void Query::bind(const Database& db) const {
  if (atoms.empty()) throw SemanticError("query has no relations");
  std::set<std::string> names;
  for (const QueryAtom& a : atoms) {
    if (!names.insert(a.name).second)
      throw SemanticError("duplicate atom name " + a.name);
    const Relation& r = db.relation(a.relation);
    if (a.columns != r.columns())
      throw SemanticError("atom " + a.name + ": declared columns do not match relation " +
                          a.relation);
  }
  for (const auto& [l, r] : equalities) {
    check_attribute(*this, l, "WHERE");
    check_attribute(*this, r, "WHERE");
  }
  for (const ConstPredicate& p : constants) {
    check_attribute(*this, p.attr, "WHERE");
    const QueryAtom* a = find_atom(p.attr.atom);
    const Relation& r = db.relation(a->relation);
    std::size_t col = *r.column_index(p.attr.column);
    if (r.row_count() > 0) {
      Domain want = p.constant.is_string() ? Domain::String : Domain::Integer;
      if (want != r.domain(col))
        throw SemanticError("constant " + p.constant.to_string() +
                            " does not match the domain of " + p.attr.qualified());
    }
  }
  for (const Attribute& a : projection) check_attribute(*this, a, "PROJECT");
}

Relation load_relation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open relation file " + path);

  auto fail = [&](std::size_t line, std::size_t col, const std::string& msg) {
    throw ParseError(path + ":" + std::to_string(line) + ":" +
                     std::to_string(col) + ": " + msg);
  };

  // Splits on single TABs, recording the 1-based start column of each field.
  auto split = [](const std::string& line) {
    std::vector<std::pair<std::string, std::size_t>> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab - start), start + 1);
      if (tab == std::string::npos) return fields;
      start = tab + 1;
    }
  };

  std::string line;
  std::size_t lineno = 0;
  std::optional<Relation> rel;
  std::vector<Domain> domains;
  bool have_domains = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);

    if (!rel) {
      if (fields.size() < 2)
        fail(lineno, 1, "header needs a relation name and at least one attribute");
      for (const auto& [name, col] : fields)
        if (name.empty()) fail(lineno, col, "empty name in header");
      std::vector<std::string> cols;
      for (std::size_t i = 1; i < fields.size(); ++i)
        cols.push_back(fields[i].first);
      try {
        rel.emplace(fields[0].first, std::move(cols));
      } catch (const SemanticError& e) {
        fail(lineno, 1, e.what());
      }
      continue;
    }

    if (fields.size() != rel->arity())
      fail(lineno, 1, "expected " + std::to_string(rel->arity()) +
                          " values, got " + std::to_string(fields.size()));
    std::vector<Value> row;
    row.reserve(fields.size());
    for (const auto& [text, col] : fields) {
      if (text.empty()) fail(lineno, col, "empty value");
      row.push_back(Value::parse(text));
    }
    if (!have_domains) {
      for (const Value& v : row)
        domains.push_back(v.is_string() ? Domain::String : Domain::Integer);
      have_domains = true;
    } else {
      for (std::size_t i = 0; i < row.size(); ++i) {
        Domain d = row[i].is_string() ? Domain::String : Domain::Integer;
        if (d != domains[i])
          fail(lineno, fields[i].second,
               "mixed value domains in column " + rel->columns()[i]);
      }
    }
    rel->add_row(row);
  }
  if (!rel) throw ParseError(path + ":1:1: missing header line");
  return *rel;
}

bool class_contains(const std::string& classId, const std::string& attr) {
  std::size_t pos = 0;
  while (pos <= classId.size()) {
    std::size_t end = classId.find('=', pos);
    if (end == std::string::npos) end = classId.size();
    if (classId.compare(pos, end - pos, attr) == 0) return true;
    pos = end + 1;
  }
  return false;
}

std::vector<AttributeClass> equivalence_classes(const Query& q) {
  std::vector<Attribute> attrs = q.all_attributes();
  std::map<Attribute, std::size_t> index;
  for (std::size_t i = 0; i < attrs.size(); ++i) index[attrs[i]] = i;

  std::vector<std::size_t> parent(attrs.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (const auto& [l, r] : q.equalities) {
    auto li = index.find(l), ri = index.find(r);
    if (li == index.end())
      throw SemanticError("equality references unknown attribute " + l.qualified());
    if (ri == index.end())
      throw SemanticError("equality references unknown attribute " + r.qualified());
    parent[find(li->second)] = find(ri->second);
  }

  std::map<std::size_t, std::vector<Attribute>> groups;
  for (std::size_t i = 0; i < attrs.size(); ++i)
    groups[find(i)].push_back(attrs[i]);

  std::vector<AttributeClass> classes;
  for (auto& [root, members] : groups)
    classes.push_back(AttributeClass::of(std::move(members)));
  std::sort(classes.begin(), classes.end(),
            [](const AttributeClass& a, const AttributeClass& b) { return a.id < b.id; });
  return classes;
}

std::vector<DependencySet> dependency_sets(
    const Query& q, const std::vector<AttributeClass>& classes) {
  std::map<Attribute, const AttributeClass*> owner;
  for (const AttributeClass& c : classes)
    for (const Attribute& a : c.members) owner[a] = &c;

  std::vector<DependencySet> deps;
  for (const QueryAtom& atom : q.atoms) {
    std::set<std::string> ids;
    for (const std::string& col : atom.columns) {
      auto it = owner.find({atom.name, col});
      if (it == owner.end())
        throw SemanticError("classes do not cover " + atom.name + "." + col);
      ids.insert(it->second->id);
    }
    deps.push_back({atom.name, {ids.begin(), ids.end()}});
  }
  return deps;
}

}  // namespace fdb
