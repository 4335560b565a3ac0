#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <cmath>
#include <random>
#include <set>

#include "fdb/baseline.hpp"
#include "fdb/errors.hpp"
#include "fdb/frep.hpp"
#include "helpers.hpp"

using namespace fdb;
using namespace fdbtest;

namespace {

// The Q1-over-T1 expression, written out by hand from the fixture rows
// with union values ascending; 23 singletons for 14 tuples.
const char* kQ1T1 =
    "(u"
    " (v Cheese (x (u (v 01) (v 03))"
    " (u (v Antalya (u (v Volkan))) (v Istanbul (u (v Adnan) (v Yasemin))))))"
    " (v Melon (x (u (v 02) (v 03))"
    " (u (v Istanbul (u (v Adnan) (v Yasemin))))))"
    " (v Milk (x (u (v 01))"
    " (u (v Antalya (u (v Volkan))) (v Istanbul (u (v Adnan) (v Yasemin)))"
    " (v Izmir (u (v Adnan)))))))";

// Q2 over T3: every supplier pairs its items with its delivery
// locations independently; 12 singletons for 6 tuples.
const char* kQ2T3 =
    "(u"
    " (v Byzantium (x (u (v Melon)) (u (v Istanbul))))"
    " (v Dikici (x (u (v Milk)) (u (v Antalya) (v Istanbul) (v Izmir))))"
    " (v Guney (x (u (v Cheese) (v Milk)) (u (v Antalya)))))";

/// Sorts an enumeration into the baseline's column order (schema ids
/// ascending) so the two result sets compare directly.
std::vector<std::vector<Value>> as_flat_rows(const FRep& rep) {
  std::vector<std::string> schema = tuple_schema(rep.tree);
  std::vector<std::size_t> order(schema.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return schema[a] < schema[b];
  });
  std::vector<std::vector<Value>> rows;
  for (TupleIterator it(rep.root); !it.done(); it.advance()) {
    std::vector<Value> row;
    for (std::size_t i : order) row.push_back(it.tuple()[i]);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

Relation random_relation(const std::string& name, std::vector<std::string> cols,
                         std::size_t rows, int domainSize, std::mt19937_64& rng) {
  Relation r(name, cols);
  std::uniform_int_distribution<int> pick(1, domainSize);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<Value> row;
    for (std::size_t c = 0; c < cols.size(); ++c)
      row.push_back(Value::integer(pick(rng)));
    r.add_row(row);
  }
  return r;
}

}  // namespace

TEST_CASE("grocery joins factorise to the expected expressions") {
  Database db = grocery_db();

  FRep r1 = factorise(db, grocery_q1(), grocery_t1());
  CHECK(serialize_frep(r1) == kQ1T1);
  CHECK(rep_size(r1) == 23);
  CHECK(count_tuples(r1.root) == 14);
  CHECK_NOTHROW(validate_frep(r1));

  FRep r2 = factorise(db, grocery_q2(), grocery_t3());
  CHECK(serialize_frep(r2) == kQ2T3);
  CHECK(rep_size(r2) == 12);
  CHECK(count_tuples(r2.root) == 6);
}

TEST_CASE("factorised size matches the per-tree exact size") {
  Database db = grocery_db();
  auto check = [&](const Query& q, const FTree& t) {
    FRep r = factorise(db, q, t);
    CHECK(rep_size(r) == exact_size(t, db, q));
    CHECK(count_tuples(r.root) == eval_flat(db, q).rows.size());
  };
  check(grocery_q1(), grocery_t1());
  check(grocery_q1(), grocery_t2());
  check(grocery_q2(), grocery_t3());
  check(grocery_q2(), grocery_t4());
  check(grocery_q_all(false), grocery_t5());
  check(grocery_q_all(true), grocery_t6());
}

TEST_CASE("flat size of Q1 is four times its tuple count") {
  Database db = grocery_db();
  FlatResult flat = eval_flat(db, grocery_q1());
  CHECK(flat.rows.size() * flat.schema.size() == 56);
}

TEST_CASE("enumeration streams tuples in nested-union order") {
  Database db = grocery_db();
  FRep rep = factorise(db, grocery_q1(), grocery_t1());
  CHECK(tuple_schema(rep.tree) ==
        std::vector<std::string>{"Orders.item=Store.item", "Orders.oid",
                                 "Disp.location=Store.location",
                                 "Disp.dispatcher"});

  std::vector<std::vector<Value>> tuples;
  for (TupleIterator it(rep.root); !it.done(); it.advance())
    tuples.push_back(it.tuple());
  REQUIRE(tuples.size() == 14);
  CHECK(tuples.front() ==
        std::vector<Value>{Value::string("Cheese"), Value::string("01"),
                           Value::string("Antalya"), Value::string("Volkan")});
  CHECK(tuples.back() ==
        std::vector<Value>{Value::string("Milk"), Value::string("01"),
                           Value::string("Izmir"), Value::string("Adnan")});
  // Nested-union order is lexicographic over the tree's column order.
  CHECK(std::is_sorted(tuples.begin(), tuples.end()));
  std::set<std::vector<Value>> unique(tuples.begin(), tuples.end());
  CHECK(unique.size() == tuples.size());
}

TEST_CASE("enumeration equals the flat baseline on every fixture tree") {
  Database db = grocery_db();
  auto check = [&](const Query& q, const FTree& t) {
    FRep rep = factorise(db, q, t);
    FlatResult flat = eval_flat(db, q);
    CHECK(as_flat_rows(rep) == flat.rows);
  };
  check(grocery_q1(), grocery_t1());
  check(grocery_q1(), grocery_t2());
  check(grocery_q2(), grocery_t3());
  check(grocery_q2(), grocery_t4());
  check(grocery_q_all(false), grocery_t5());
  check(grocery_q_all(true), grocery_t6());
}

TEST_CASE("degenerate expressions behave") {
  CHECK(count_tuples(FExpr::empty()) == 0);
  CHECK(rep_size(FExpr::empty()) == 0);
  CHECK(enumerate_all(FExpr::empty()).empty());

  CHECK(count_tuples(FExpr::nullary()) == 1);
  CHECK(rep_size(FExpr::nullary()) == 0);
  auto one = enumerate_all(FExpr::nullary());
  REQUIRE(one.size() == 1);
  CHECK(one[0].empty());

  // Product over independent unions multiplies counts.
  FExprPtr u3 = FExpr::make_union(
      1, {{Value::integer(1), nullptr},
          {Value::integer(2), nullptr},
          {Value::integer(3), nullptr}});
  FExprPtr u4 = FExpr::make_union(
      1, {{Value::integer(1), nullptr},
          {Value::integer(2), nullptr},
          {Value::integer(5), nullptr},
          {Value::integer(9), nullptr}});
  FExprPtr prod = product_of({u3, u4});
  CHECK(count_tuples(prod) == 12);
  CHECK(rep_size(prod) == 7);
  CHECK(enumerate_all(prod).size() == 12);

  // A shared subexpression counts once per occurrence.
  FExprPtr twice = FExpr::make_union(1, {{Value::integer(1), u4},
                                         {Value::integer(2), u4}});
  CHECK(rep_size(twice) == 2 + 2 * 4);
  CHECK(count_tuples(twice) == 8);
}

TEST_CASE("empty relations produce the empty representation") {
  Database db = grocery_db();
  Relation none("None", {"item", "tag"});
  db.add(std::move(none));
  Query q;
  q.atoms = {atom("Orders", {"oid", "item"}), atom("None", {"item", "tag"})};
  q.equalities = {{{"Orders", "item"}, {"None", "item"}}};
  FTree t = make_tree(q, {{"item", {{"oid", {}}, {"tag", {}}}}});
  FRep rep = factorise(db, q, t);
  CHECK(rep.root->kind == FKind::Empty);
  CHECK(serialize_frep(rep) == "E");
  CHECK(count_tuples(rep.root) == 0);
  FRep back = parse_frep("E", t);
  CHECK(back.root->kind == FKind::Empty);
}

TEST_CASE("construction output is canonical under input permutations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Database base = grocery_db();
    Database shuffled;
    for (const char* name : {"Orders", "Store", "Disp", "Produce", "Serve"}) {
      const Relation& r = base.relation(name);
      std::vector<std::size_t> order(r.row_count());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      Relation s(name, r.columns());
      for (std::size_t i : order) {
        std::vector<Value> row;
        for (std::size_t c = 0; c < r.columns().size(); ++c)
          row.push_back(r.at(i, c));
        s.add_row(row);
      }
      shuffled.add(std::move(s));
    }
    CHECK(serialize_frep(factorise(shuffled, grocery_q1(), grocery_t1())) == kQ1T1);
    CHECK(serialize_frep(factorise(shuffled, grocery_q_all(true), grocery_t6())) ==
          serialize_frep(factorise(base, grocery_q_all(true), grocery_t6())));
  }
}

TEST_CASE("factorise agrees with the baseline on random databases") {
  std::mt19937_64 rng(991);
  for (int trial = 0; trial < 40; ++trial) {
    Database db;
    db.add(random_relation("R", {"a", "b"}, 2 + trial % 9, 4, rng));
    db.add(random_relation("S", {"b2", "c"}, 2 + (trial / 2) % 8, 4, rng));
    db.add(random_relation("T", {"b3", "d"}, 2 + (trial / 3) % 7, 4, rng));
    Query q;
    q.atoms = {atom("R", {"a", "b"}), atom("S", {"b2", "c"}),
               atom("T", {"b3", "d"})};
    q.equalities = {{{"R", "b"}, {"S", "b2"}}, {{"R", "b"}, {"T", "b3"}}};

    FTree star = make_tree(q, {{"b", {{"a", {}}, {"c", {}}, {"d", {}}}}});
    FTree chain = make_tree(q, {{"b", {{"a", {{"c", {}}}}, {"d", {}}}}});
    FlatResult flat = eval_flat(db, q);
    for (const FTree& t : {star, chain}) {
      FRep rep = factorise(db, q, t);
      CHECK_NOTHROW(validate_frep(rep));
      CHECK(as_flat_rows(rep) == flat.rows);
      CHECK(rep_size(rep) == exact_size(t, db, q));
      CHECK(count_tuples(rep.root) == flat.rows.size());
    }
  }
}

TEST_CASE("size stays within the cost exponent bound") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    Database db;
    db.add(random_relation("R", {"a", "b"}, 6, 5, rng));
    db.add(random_relation("S", {"b2", "c"}, 6, 5, rng));
    Query q;
    q.atoms = {atom("R", {"a", "b"}), atom("S", {"b2", "c"})};
    q.equalities = {{{"R", "b"}, {"S", "b2"}}};
    FTree t = make_tree(q, {{"b", {{"a", {}}, {"c", {}}}}});
    FRep rep = factorise(db, q, t);
    double bound = 3.0 * std::pow(12.0, 1.0);  // classes × |D|^{s(T)}, s=1
    CHECK(static_cast<double>(rep_size(rep)) <= bound);
  }
}

TEST_CASE("multi-class nodes emit one singleton per class") {
  // One node carrying both classes: R.a and R.b always equal.
  Database db;
  Relation r("R", {"a", "b"});
  r.add_row({Value::integer(1), Value::integer(1)});
  r.add_row({Value::integer(2), Value::integer(3)});  // dropped: a != b not representable
  r.add_row({Value::integer(4), Value::integer(4)});
  db.add(std::move(r));
  Query q;
  q.atoms = {atom("R", {"a", "b"})};
  q.equalities = {{{"R", "a"}, {"R", "b"}}};

  auto classes = equivalence_classes(q);
  REQUIRE(classes.size() == 1);
  FTree t;
  FNode n;
  n.classes = {classes[0]};
  t.roots = {n};
  t.deps = dependency_sets(q, classes);
  FRep rep = factorise(db, q, t);
  CHECK(serialize_frep(rep) == "(u (v 1) (v 4))");
  CHECK(rep_size(rep) == 2);

  // Two singleton classes merged onto one node by hand.
  Database db2;
  Relation r2("R", {"a", "b"});
  r2.add_row({Value::integer(1), Value::integer(1)});
  r2.add_row({Value::integer(5), Value::integer(5)});
  db2.add(std::move(r2));
  Query q2;
  q2.atoms = {atom("R", {"a", "b"})};
  auto classes2 = equivalence_classes(q2);
  REQUIRE(classes2.size() == 2);
  FTree t2;
  FNode m;
  m.classes = classes2;
  t2.roots = {m};
  t2.deps = dependency_sets(q2, classes2);
  FRep rep2 = factorise(db2, q2, t2);
  CHECK(serialize_frep(rep2) == "(u (v 1) (v 5))");
  CHECK(rep_size(rep2) == 4);        // two singletons per group
  CHECK(count_tuples(rep2.root) == 2);
  auto tuples = enumerate_all(rep2.root);
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0] == std::vector<Value>{Value::integer(1), Value::integer(1)});
}

TEST_CASE("parse validates values, order, and tree conformance") {
  FTree t1 = grocery_t1();
  FTree t3 = grocery_t3();

  FRep rep = parse_frep(kQ1T1, t1);
  CHECK(serialize_frep(rep) == kQ1T1);
  CHECK(rep_size(rep) == 23);

  CHECK_THROWS_AS(parse_frep("(u (v Milk", t1), ParseError);
  CHECK_THROWS_AS(parse_frep("(u)", t1), SemanticError);
  // Values out of order.
  CHECK_THROWS_AS(
      parse_frep("(u (v Milk (x (u (v 01)) (u (v Antalya (u (v Volkan))))))"
                 " (v Cheese (x (u (v 01)) (u (v Antalya (u (v Volkan)))))))",
                 t1),
      SemanticError);
  // Leaf group with a subexpression.
  CHECK_THROWS_AS(parse_frep("(u (v Guney (x (u (v Milk (u (v X)))) (u (v A)))))",
                             t3),
                  SemanticError);
  // Missing subexpression under an inner node.
  CHECK_THROWS_AS(parse_frep("(u (v Guney))", t3), SemanticError);
  // Product arity differs from the forest.
  CHECK_THROWS_AS(parse_frep("(u (v Guney (x (u (v Milk)))))", t3), SemanticError);

  // Quoted values always stay strings; unquoted use the literal rule.
  Query q;
  q.atoms = {atom("R", {"a"})};
  auto cls = equivalence_classes(q);
  FTree tiny;
  FNode n;
  n.classes = cls;
  tiny.roots = {n};
  tiny.deps = dependency_sets(q, cls);
  FRep quoted = parse_frep("(u (v \"7\") (v x))", tiny);
  CHECK(quoted.root->groups[0].first == Value::string("7"));
  CHECK(serialize_frep(quoted) == "(u (v \"7\") (v x))");
  FRep plain = parse_frep("(u (v 7) (v x))", tiny);
  CHECK(plain.root->groups[0].first == Value::integer(7));
  // An integer sorts before any string, so the reverse order fails.
  CHECK_THROWS_AS(parse_frep("(u (v x) (v 7))", tiny), SemanticError);
}

TEST_CASE("quoting round-trips awkward values") {
  Query q;
  q.atoms = {atom("R", {"a"})};
  auto cls = equivalence_classes(q);
  FTree tiny;
  FNode n;
  n.classes = cls;
  tiny.roots = {n};
  tiny.deps = dependency_sets(q, cls);

  Database db;
  Relation r("R", {"a"});
  r.add_row({Value::string("has space")});
  r.add_row({Value::string("pa(ren")});
  r.add_row({Value::string("qu\"ote")});
  r.add_row({Value::string("42")});
  db.add(std::move(r));
  FRep rep = factorise(db, q, tiny);
  std::string text = serialize_frep(rep);
  FRep back = parse_frep(text, tiny);
  CHECK(serialize_frep(back) == text);
  auto tuples = enumerate_all(back.root);
  REQUIRE(tuples.size() == 4);
  CHECK(tuples[0][0] == Value::string("42"));
  CHECK(tuples[1][0] == Value::string("has space"));
}

TEST_CASE("factorise rejects foreign trees and constant nodes") {
  Database db = grocery_db();
  CHECK_THROWS_AS(factorise(db, grocery_q1(), grocery_t3()), SemanticError);

  FTree t = grocery_t1();
  FNode item = t.roots[0];
  FTree sel;
  sel.deps = t.deps;
  FNode c;
  c.classes = item.classes;
  c.constant = true;
  sel.roots.push_back(c);
  for (const FNode& ch : item.children) sel.roots.push_back(ch);
  CHECK_THROWS_AS(factorise(db, grocery_q1(), sel), SemanticError);
}

TEST_CASE("an expired deadline aborts construction") {
  Database db = grocery_db();
  Deadline d = Deadline::in(std::chrono::milliseconds(0));
  CHECK_THROWS_AS(factorise(db, grocery_q1(), grocery_t1(), d), BudgetError);
}
