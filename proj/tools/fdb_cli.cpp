#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fdb/baseline.hpp"
#include "fdb/catalog.hpp"
#include "fdb/errors.hpp"
#include "fdb/frep.hpp"
#include "fdb/ftree.hpp"
#include "fdb/operators.hpp"
#include "fdb/optimizer.hpp"
#include "fdb/query_text.hpp"
#include "fdb/workload.hpp"

using namespace fdb;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw SemanticError("cannot write " + path);
  out << text;
}

std::string with_nl(std::string text) {
  if (text.empty() || text.back() != '\n') text += '\n';
  return text;
}

void for_each_node(const FTree& tree, const std::function<void(const FNode&)>& fn) {
  std::function<void(const FNode&)> walk = [&](const FNode& n) {
    fn(n);
    for (const FNode& c : n.children) walk(c);
  };
  for (const FNode& r : tree.roots) walk(r);
}

/// Query whose bound equivalence classes are exactly the tree's classes:
/// same atoms, equalities chaining each multi-member class.  This is the
/// query a stored representation was factorised for.
Query base_query_for_tree(const Query& q, const FTree& tree) {
  Query base;
  base.atoms = q.atoms;
  for_each_node(tree, [&](const FNode& n) {
    for (const AttributeClass& cls : n.classes)
      for (std::size_t i = 1; i < cls.members.size(); ++i)
        base.equalities.emplace_back(cls.members[0], cls.members[i]);
  });
  return base;
}

/// Join conditions of `q` not yet reflected in the tree: equalities
/// whose sides sit in different classes.
std::vector<JoinCondition> unsatisfied_conditions(const Query& q,
                                                  const FTree& tree) {
  std::map<std::string, std::string> classOf;
  for_each_node(tree, [&](const FNode& n) {
    for (const AttributeClass& cls : n.classes)
      for (const Attribute& a : cls.members) classOf[a.qualified()] = cls.id;
  });
  std::vector<JoinCondition> conds;
  for (const auto& [a, b] : q.equalities) {
    auto ca = classOf.find(a.qualified());
    auto cb = classOf.find(b.qualified());
    if (ca == classOf.end() || cb == classOf.end())
      throw SemanticError("attribute " + (ca == classOf.end() ? a : b).qualified() +
                          " does not appear in the stored f-tree");
    if (ca->second != cb->second)
      conds.emplace_back(a.qualified(), b.qualified());
  }
  return conds;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Tab-separated result rows over the query's output attributes (its
/// projection, or every attribute), sorted.  Both engines print through
/// this, so their outputs are directly comparable: class-valued columns
/// repeat per member attribute.
std::string result_text(const Query& q, const std::vector<std::string>& schema,
                        const std::vector<std::vector<Value>>& rows,
                        std::size_t& rowsOut) {
  std::vector<Attribute> attrs =
      q.projection.empty() ? q.all_attributes() : q.projection;
  std::vector<std::size_t> cols;
  for (const Attribute& a : attrs) {
    std::size_t i = 0;
    while (i < schema.size() && !class_contains(schema[i], a.qualified())) ++i;
    if (i == schema.size())
      throw SemanticError("attribute " + a.qualified() +
                          " missing from the result schema");
    cols.push_back(i);
  }
  std::vector<std::vector<Value>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<Value> pr;
    pr.reserve(cols.size());
    for (std::size_t c : cols) pr.push_back(r[c]);
    out.push_back(std::move(pr));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  rowsOut = out.size();

  std::string text = "Result";
  for (const Attribute& a : attrs) text += "\t" + a.qualified();
  text += "\n";
  for (const auto& r : out) {
    for (std::size_t i = 0; i < r.size(); ++i)
      text += (i ? "\t" : "") + r[i].to_string();
    text += "\n";
  }
  return text;
}

/// One plan step in the textual plan grammar.
std::string render_step(const OperatorApplication& s) {
  if (s.kind == OpKind::Project) return "project " + join(s.args, ",");
  std::string out = to_string(s.kind);
  for (const std::string& a : s.args) out += " " + a;
  return out;
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Replays `steps` on `rep`, printing one trace line per step.
FRep trace_steps(FRep rep, const std::vector<OperatorApplication>& steps,
                 std::ostream& os) {
  char msbuf[32];
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const OperatorApplication& s = steps[k];
    std::size_t sizeIn = rep_size(rep);
    auto t0 = std::chrono::steady_clock::now();
    FRep out = apply_step(rep, s);
    auto t1 = std::chrono::steady_clock::now();
    std::snprintf(msbuf, sizeof msbuf, "%.3f", ms_between(t0, t1));
    os << "STEP " << k + 1 << ": " << to_string(s.kind) << "("
       << join(s.args, ",") << ")"
       << " s_in=" << s_cost(s.inTree).to_string()
       << " s_out=" << s_cost(s.outTree).to_string() << " size_in=" << sizeIn
       << " size_out=" << rep_size(out) << " ms=" << msbuf << "\n";
    rep = std::move(out);
  }
  return rep;
}

struct CommonArgs {
  std::string queryFile, dataDir, statsFile;
};

Database load_inputs(const CommonArgs& args, Query& q) {
  q = load_query_file(args.queryFile);
  Database db;
  db.load_directory(args.dataDir);
  if (!args.statsFile.empty()) db.stats().apply_override_file(args.statsFile);
  q.bind(db);
  return db;
}

PlanOrder order_for(const std::string& cost, const Query& q, const Database& db) {
  PlanOrder order;
  if (cost == "estimate") {
    order.mode = PlanOrder::Mode::Estimate;
    order.stats = &db.stats();
    for (const QueryAtom& a : q.atoms) order.aliases[a.name] = a.relation;
  }
  return order;
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeArgs : CommonArgs {
  std::string ftreeFile, algo = "exhaustive", cost = "bound";
  bool trace = false;
};

int run_optimize(const OptimizeArgs& args) {
  Query q;
  Database db = load_inputs(args, q);
  PlanOrder order = order_for(args.cost, q, db);

  if (args.ftreeFile.empty()) {
    // Flat input: choose the f-tree the join result will be built over.
    FTree tree = optimal_ftree(db, q);
    std::cout << serialize_ftree(tree) << "\n";
    std::cout << "s=" << s_cost(tree).to_string() << "\n";
    if (order.mode == PlanOrder::Mode::Estimate) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g",
                    size_estimate(tree, *order.stats, order.aliases));
      std::cout << "est=" << buf << "\n";
    }
    return 0;
  }

  // Factorised input: restructure the stored tree to satisfy the
  // query's remaining join conditions.
  FTree in = parse_ftree(read_file(args.ftreeFile));
  std::vector<JoinCondition> conds = unsatisfied_conditions(q, in);
  FPlan plan = args.algo == "greedy" ? greedy_plan(in, conds, order)
                                     : exhaustive_plan(in, conds, order);
  for (const OperatorApplication& s : plan.steps)
    std::cout << render_step(s) << "\n";
  std::cout << "s(f)=" << plan.boundCost.to_string() << "\n";
  std::cout << "s(final)=" << plan.finalCost.to_string() << "\n";
  if (order.mode == PlanOrder::Mode::Estimate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", plan.estimateCost);
    std::cout << "est=" << buf << "\n";
  }

  if (args.trace) {
    FRep rep = factorise(db, base_query_for_tree(q, in), in);
    trace_steps(std::move(rep), plan.steps, std::cout);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs : CommonArgs {
  std::string ftreeFile, inFrep, inFtree, engine = "fdb", outFile, outFtreeFile;
  std::string algo = "greedy";
  bool enumerate = false;
};

int run_eval(const EvalArgs& args) {
  Query q;
  Database db = load_inputs(args, q);

  if (args.engine == "flat") {
    FlatResult r = eval_flat(db, q);
    std::size_t nrows = 0;
    std::string text = result_text(q, r.schema, r.rows, nrows);
    if (args.outFile.empty())
      std::cout << text;
    else
      write_file(args.outFile, text);
    std::cerr << "rows=" << nrows << "\n";
    return 0;
  }
  if (args.engine != "fdb")
    throw SemanticError("unknown engine " + args.engine);

  // Join phase: either factorise from scratch over the optimal f-tree,
  // or restructure a stored representation with an f-plan.
  FRep rep;
  if (args.inFrep.empty()) {
    Query joins;
    joins.atoms = q.atoms;
    joins.equalities = q.equalities;
    FTree tree = args.ftreeFile.empty()
                     ? optimal_ftree(db, joins)
                     : parse_ftree(read_file(args.ftreeFile));
    rep = factorise(db, joins, tree);
  } else {
    FTree in = parse_ftree(read_file(args.inFtree));
    rep = parse_frep(read_file(args.inFrep), in);
    std::vector<JoinCondition> conds = unsatisfied_conditions(q, in);
    FPlan plan = args.algo == "greedy" ? greedy_plan(in, conds)
                                       : exhaustive_plan(in, conds);
    rep = apply_plan(rep, plan);
  }

  // Selections, then the projection, on the factorised result.
  for (const ConstPredicate& p : q.constants)
    rep = op_select_const(rep, p.attr.qualified(), p.op, p.constant);
  if (!q.projection.empty()) {
    std::vector<std::string> keep;
    for (const Attribute& a : q.projection) keep.push_back(a.qualified());
    rep = op_project(rep, keep);
  }

  if (args.enumerate) {
    std::size_t nrows = 0;
    std::string text =
        result_text(q, tuple_schema(rep.tree), enumerate_all(rep.root), nrows);
    if (args.outFile.empty())
      std::cout << text;
    else
      write_file(args.outFile, text);
    std::cerr << "rows=" << nrows << "\n";
  } else {
    std::string text = with_nl(serialize_frep(rep));
    if (args.outFile.empty()) {
      std::cout << text;
    } else {
      write_file(args.outFile, text);
      std::string treePath =
          args.outFtreeFile.empty() ? args.outFile + ".ftree" : args.outFtreeFile;
      write_file(treePath, with_nl(serialize_ftree(rep.tree)));
    }
    std::cerr << "singletons=" << rep_size(rep)
              << " tuples=" << count_tuples(rep.root) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  int exp = 0;
  std::string gridFile, outDir;
  std::uint64_t seed = 1;
  double timeout = 100.0;
  std::size_t seeds = 5;
  std::size_t threads = 1;
};

std::size_t parse_count(const std::string& path, int line, const std::string& s) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<GenSpec> parse_grid_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open grid file " + path);
  std::vector<GenSpec> cells;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kv;
    GenSpec g;
    g.seed = seed;
    bool any = false;
    while (ls >> kv) {
      any = true;
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": expected key=value, got '" + kv + "'");
      std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "R")
        g.relations = parse_count(path, lineno, val);
      else if (key == "A")
        g.attributes = parse_count(path, lineno, val);
      else if (key == "n")
        g.tuplesPerRelation = parse_count(path, lineno, val);
      else if (key == "M")
        g.maxValue = static_cast<std::int64_t>(parse_count(path, lineno, val));
      else if (key == "K")
        g.flatEqualities = parse_count(path, lineno, val);
      else if (key == "L")
        g.followupEqualities = parse_count(path, lineno, val);
      else if (key == "skew")
        try {
          g.skew = std::stod(val);
        } catch (const std::exception&) {
          throw ParseError(path + ":" + std::to_string(lineno) +
                           ": bad number '" + val + "'");
        }
      else if (key == "dist") {
        if (val == "uniform")
          g.dist = GenSpec::Dist::Uniform;
        else if (val == "zipf")
          g.dist = GenSpec::Dist::Zipf;
        else
          throw ParseError(path + ":" + std::to_string(lineno) +
                           ": dist must be uniform or zipf");
      } else {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": unknown grid key '" + key + "'");
      }
    }
    if (any) cells.push_back(g);
  }
  if (cells.empty())
    throw ParseError(path + ": grid file defines no cells");
  return cells;
}

int run_bench(const BenchArgs& args) {
  ExperimentOptions opts;
  opts.seedsPerCell = args.seeds;
  opts.timeoutSeconds = args.timeout;
  opts.threads = args.threads;

  ExperimentReport rep;
  if (args.gridFile == "combinatorial") {
    if (args.exp != 3)
      throw SemanticError("the combinatorial grid belongs to --exp 3");
    rep = combinatorial_experiment(4, opts);
  } else {
    std::vector<GenSpec> cells = parse_grid_file(args.gridFile, args.seed);
    switch (args.exp) {
      case 1: rep = experiment1(cells, opts); break;
      case 2: rep = experiment2(cells, opts); break;
      case 3: rep = experiment3(cells, opts); break;
      case 4: rep = experiment4(cells, opts); break;
      default: throw SemanticError("--exp must be 1, 2, 3, or 4");
    }
  }

  // One gnuplot table per figure: x axis and series per experiment.
  std::string xcol;
  std::vector<std::string> ycols;
  switch (args.exp) {
    case 1:
      xcol = "A";
      ycols = {"opt_ms_mean", "opt_ms_median", "plan_cost"};
      break;
    case 2:
      xcol = "L";
      ycols = {"opt_ms_mean", "opt_ms_median", "plan_cost", "final_cost"};
      break;
    case 3:
      xcol = "K";
      ycols = {"fact_singletons", "flat_singletons", "fdb_ms_mean",
               "flat_ms_mean"};
      break;
    case 4:
      xcol = "L";
      ycols = {"fdb_ms_mean", "flat_ms_mean", "fact_singletons",
               "flat_singletons"};
      break;
  }

  std::filesystem::create_directories(args.outDir);
  std::string stem = args.outDir + "/exp" + std::to_string(args.exp);
  write_file(stem + ".csv", to_csv(rep));
  write_file(stem + ".dat", to_dat(rep, xcol, ycols));
  std::cout << "wrote " << stem << ".csv and " << stem << ".dat ("
            << rep.rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"In-memory query engine over factorised representations"};
  app.require_subcommand(1);

  OptimizeArgs oa;
  CLI::App* opt = app.add_subcommand(
      "optimize", "Pick an optimal f-tree or an f-plan for a query");
  opt->add_option("--query", oa.queryFile, "query file")->required();
  opt->add_option("--data", oa.dataDir, "directory of relation files")->required();
  opt->add_option("--ftree", oa.ftreeFile,
                  "stored f-tree; plan its restructuring instead");
  opt->add_option("--algo", oa.algo, "plan search: exhaustive|greedy")
      ->check(CLI::IsMember({"exhaustive", "greedy"}));
  opt->add_option("--cost", oa.cost, "plan order: bound|estimate")
      ->check(CLI::IsMember({"bound", "estimate"}));
  opt->add_option("--stats", oa.statsFile, "statistics override file");
  opt->add_flag("--trace", oa.trace, "replay the plan on data, one line per step");

  EvalArgs ea;
  CLI::App* ev = app.add_subcommand("eval", "Evaluate a query");
  ev->add_option("--query", ea.queryFile, "query file")->required();
  ev->add_option("--data", ea.dataDir, "directory of relation files")->required();
  ev->add_option("--ftree", ea.ftreeFile,
                 "factorise over this f-tree instead of searching");
  CLI::Option* inFrep =
      ev->add_option("--in-frep", ea.inFrep, "stored f-representation");
  CLI::Option* inFtree =
      ev->add_option("--in-ftree", ea.inFtree, "its f-tree");
  inFrep->needs(inFtree);
  inFtree->needs(inFrep);
  ev->add_option("--engine", ea.engine, "fdb|flat")
      ->check(CLI::IsMember({"fdb", "flat"}));
  ev->add_option("--out", ea.outFile, "write the result here");
  ev->add_option("--out-ftree", ea.outFtreeFile,
                 "f-tree output path (default: --out plus .ftree)");
  ev->add_option("--algo", ea.algo, "follow-up plan search: exhaustive|greedy")
      ->check(CLI::IsMember({"exhaustive", "greedy"}));
  ev->add_option("--stats", ea.statsFile, "statistics override file");
  ev->add_flag("--enumerate", ea.enumerate, "print tuples instead of the f-rep");

  BenchArgs ba;
  CLI::App* be = app.add_subcommand("bench", "Run an experiment grid");
  be->add_option("--exp", ba.exp, "experiment number 1-4")->required();
  be->add_option("--grid", ba.gridFile, "grid file, or 'combinatorial'")
      ->required();
  be->add_option("--seed", ba.seed, "base seed for every cell");
  be->add_option("--timeout", ba.timeout, "per-seed budget in seconds");
  be->add_option("--out", ba.outDir, "report directory")->required();
  be->add_option("--seeds", ba.seeds, "seeds per cell");
  be->add_option("--threads", ba.threads, "parallel cell workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (opt->parsed()) return run_optimize(oa);
    if (ev->parsed()) return run_eval(ea);
    return run_bench(ba);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
