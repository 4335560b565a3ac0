#include "fdb/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fdb/errors.hpp"

namespace fdb {
namespace {

struct Table {
  std::vector<std::string> classes;
  std::vector<std::vector<Value>> rows;
};

// Scan of one atom: constants applied, intra-atom equalities enforced,
// one column per distinct class, duplicates dropped.
Table atom_table(const Database& db, const Query& q, const QueryAtom& atom,
                 const std::map<Attribute, std::string>& classOf) {
  const Relation& rel = db.relation(atom.relation);

  std::vector<std::string> classes;
  std::vector<std::size_t> firstCol;  // representative column per class
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t c = 0; c < atom.columns.size(); ++c) {
    const std::string& id = classOf.at({atom.name, atom.columns[c]});
    auto& cols = members[id];
    if (cols.empty()) {
      classes.push_back(id);
      firstCol.push_back(c);
    }
    cols.push_back(c);
  }

  std::vector<const ConstPredicate*> preds;
  for (const ConstPredicate& p : q.constants)
    if (p.attr.atom == atom.name) preds.push_back(&p);

  Table t;
  t.classes = classes;
  for (std::size_t r = 0; r < rel.row_count(); ++r) {
    bool ok = true;
    for (const ConstPredicate* p : preds) {
      std::size_t col = *rel.column_index(p->attr.column);
      if (!eval_cmp(rel.at(r, col), p->op, p->constant)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (const auto& [id, cols] : members)
      for (std::size_t i = 1; i < cols.size() && ok; ++i)
        if (rel.at(r, cols[0]) != rel.at(r, cols[i])) ok = false;
    if (!ok) continue;
    std::vector<Value> row;
    row.reserve(classes.size());
    for (std::size_t c : firstCol) row.push_back(rel.at(r, c));
    t.rows.push_back(std::move(row));
  }
  std::sort(t.rows.begin(), t.rows.end());
  t.rows.erase(std::unique(t.rows.begin(), t.rows.end()), t.rows.end());
  return t;
}

// System-R size estimate for joining a set of atoms: product of row
// counts, divided per shared class by V^(cover-1).
double estimate_join(const Database& db, const Query& q,
                     const std::map<Attribute, std::string>& classOf,
                     const std::vector<std::size_t>& atomIdx) {
  const Catalogue& stats = db.stats();
  double est = 1;
  for (std::size_t i : atomIdx) {
    auto it = stats.rowCount.find(q.atoms[i].relation);
    est *= it == stats.rowCount.end() ? 1.0 : static_cast<double>(it->second);
  }
  std::map<std::string, std::vector<const QueryAtom*>> byClass;
  for (std::size_t i : atomIdx) {
    const QueryAtom& a = q.atoms[i];
    std::set<std::string> mine;
    for (const std::string& col : a.columns) mine.insert(classOf.at({a.name, col}));
    for (const std::string& id : mine) byClass[id].push_back(&a);
  }
  for (const auto& [id, atoms] : byClass) {
    if (atoms.size() < 2) continue;
    double v = 1;
    bool have = false;
    for (const QueryAtom* a : atoms)
      for (const std::string& col : a->columns)
        if (classOf.at({a->name, col}) == id) {
          auto it = stats.distinctCount.find(a->relation + "." + col);
          if (it != stats.distinctCount.end()) {
            double d = static_cast<double>(std::max<std::size_t>(it->second, 1));
            v = have ? std::min(v, d) : d;
            have = true;
          }
        }
    if (have)
      est /= std::pow(v, static_cast<double>(atoms.size() - 1));
  }
  return est;
}

Table merge_join(const Table& left, const Table& right, const Deadline& deadline) {
  std::vector<std::size_t> lKey, rKey;
  std::vector<std::size_t> rExtra;
  for (std::size_t j = 0; j < right.classes.size(); ++j) {
    auto it = std::find(left.classes.begin(), left.classes.end(), right.classes[j]);
    if (it != left.classes.end()) {
      lKey.push_back(static_cast<std::size_t>(it - left.classes.begin()));
      rKey.push_back(j);
    } else {
      rExtra.push_back(j);
    }
  }

  auto key_cmp = [](const std::vector<Value>& a, const std::vector<std::size_t>& ka,
                    const std::vector<Value>& b, const std::vector<std::size_t>& kb) {
    for (std::size_t i = 0; i < ka.size(); ++i) {
      if (a[ka[i]] < b[kb[i]]) return -1;
      if (b[kb[i]] < a[ka[i]]) return 1;
    }
    return 0;
  };

  std::vector<std::vector<Value>> lRows = left.rows, rRows = right.rows;
  std::sort(lRows.begin(), lRows.end(),
            [&](const auto& a, const auto& b) { return key_cmp(a, lKey, b, lKey) < 0; });
  std::sort(rRows.begin(), rRows.end(),
            [&](const auto& a, const auto& b) { return key_cmp(a, rKey, b, rKey) < 0; });

  Table out;
  out.classes = left.classes;
  for (std::size_t j : rExtra) out.classes.push_back(right.classes[j]);

  std::size_t li = 0, ri = 0;
  while (li < lRows.size() && ri < rRows.size()) {
    deadline.check("flat join");
    int c = key_cmp(lRows[li], lKey, rRows[ri], rKey);
    if (c < 0) {
      ++li;
      continue;
    }
    if (c > 0) {
      ++ri;
      continue;
    }
    std::size_t lEnd = li, rEnd = ri;
    while (lEnd < lRows.size() && key_cmp(lRows[lEnd], lKey, rRows[ri], rKey) == 0) ++lEnd;
    while (rEnd < rRows.size() && key_cmp(lRows[li], lKey, rRows[rEnd], rKey) == 0) ++rEnd;
    for (std::size_t a = li; a < lEnd; ++a) {
      deadline.check("flat join");
      for (std::size_t b = ri; b < rEnd; ++b) {
        std::vector<Value> row = lRows[a];
        for (std::size_t j : rExtra) row.push_back(rRows[b][j]);
        out.rows.push_back(std::move(row));
      }
    }
    li = lEnd;
    ri = rEnd;
  }
  return out;
}

}  // namespace

FlatResult eval_flat(const Database& db, const Query& q, const Deadline& deadline) {
  q.bind(db);
  deadline.check("flat join");
  std::vector<AttributeClass> classes = equivalence_classes(q);
  std::map<Attribute, std::string> classOf;
  for (const AttributeClass& c : classes)
    for (const Attribute& m : c.members) classOf[m] = c.id;

  // Left-deep greedy order: cheapest single scan first, then repeatedly
  // the connected atom with the cheapest estimated combined size; a
  // cross product only when nothing is connected.
  std::vector<std::size_t> remaining(q.atoms.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> order;
  std::set<std::string> haveClasses;

  auto atom_classes = [&](std::size_t i) {
    std::set<std::string> s;
    for (const std::string& col : q.atoms[i].columns)
      s.insert(classOf.at({q.atoms[i].name, col}));
    return s;
  };

  while (!remaining.empty()) {
    std::size_t bestPos = 0;
    double bestEst = 0;
    bool bestConnected = false, first = true;
    for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
      std::size_t i = remaining[pos];
      bool connected = order.empty();
      if (!order.empty())
        for (const std::string& id : atom_classes(i))
          if (haveClasses.count(id)) connected = true;
      std::vector<std::size_t> trial = order;
      trial.push_back(i);
      double est = estimate_join(db, q, classOf, trial);
      if (first || std::make_pair(!connected, est) < std::make_pair(!bestConnected, bestEst)) {
        first = false;
        bestPos = pos;
        bestEst = est;
        bestConnected = connected;
      }
    }
    std::size_t chosen = remaining[bestPos];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(bestPos));
    order.push_back(chosen);
    for (const std::string& id : atom_classes(chosen)) haveClasses.insert(id);
  }

  Table acc = atom_table(db, q, q.atoms[order[0]], classOf);
  for (std::size_t k = 1; k < order.size(); ++k) {
    deadline.check("flat join");
    acc = merge_join(acc, atom_table(db, q, q.atoms[order[k]], classOf), deadline);
  }

  // Column selection: projected classes, or all of them; always sorted
  // by class id, rows deduplicated.
  std::vector<std::string> keep;
  if (q.projection.empty()) {
    for (const AttributeClass& c : classes) keep.push_back(c.id);
  } else {
    std::set<std::string> s;
    for (const Attribute& a : q.projection) s.insert(classOf.at(a));
    keep.assign(s.begin(), s.end());
  }
  std::sort(keep.begin(), keep.end());

  std::vector<std::size_t> cols;
  for (const std::string& id : keep) {
    auto it = std::find(acc.classes.begin(), acc.classes.end(), id);
    cols.push_back(static_cast<std::size_t>(it - acc.classes.begin()));
  }

  FlatResult res;
  res.schema = keep;
  res.rows.reserve(acc.rows.size());
  for (const auto& row : acc.rows) {
    std::vector<Value> out;
    out.reserve(cols.size());
    for (std::size_t c : cols) out.push_back(row[c]);
    res.rows.push_back(std::move(out));
  }
  std::sort(res.rows.begin(), res.rows.end());
  res.rows.erase(std::unique(res.rows.begin(), res.rows.end()), res.rows.end());
  return res;
}

std::size_t ancestor_projection_count(const Database& db, const Query& q,
                                      const std::vector<std::string>& pathClassIds) {
  Query full = q;
  full.projection.clear();
  FlatResult flat = eval_flat(db, full);
  std::vector<std::size_t> cols;
  for (const std::string& id : pathClassIds) {
    auto it = std::find(flat.schema.begin(), flat.schema.end(), id);
    if (it == flat.schema.end())
      throw SemanticError("class " + id + " is not produced by the query");
    cols.push_back(static_cast<std::size_t>(it - flat.schema.begin()));
  }
  std::set<std::vector<Value>> seen;
  for (const auto& row : flat.rows) {
    std::vector<Value> key;
    for (std::size_t c : cols) key.push_back(row[c]);
    seen.insert(std::move(key));
  }
  return seen.size();
}

std::string flat_to_relation_text(const FlatResult& r, const std::string& name) {
  std::string out = name;
  for (const std::string& c : r.schema) {
    out += '\t';
    out += c;
  }
  out += '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += i ? "\t" : "";
      out += row[i].to_string();
    }
    out += '\n';
  }
  return out;
}

}  // namespace fdb
