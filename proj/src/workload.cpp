#include "fdb/workload.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "fdb/baseline.hpp"
#include "fdb/errors.hpp"
#include "fdb/frep.hpp"
#include "fdb/ftree.hpp"
#include "fdb/optimizer.hpp"

namespace fdb {

namespace {

std::int64_t uniform_draw(std::mt19937_64& rng, std::int64_t maxValue) {
  return 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(maxValue));
}

// 53 uniform bits, as in std::generate_canonical, but reproducible across
// library implementations.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

/// Union-find over the query's attributes; places non-redundant
/// equalities by drawing a uniform pair of distinct classes, then a
/// uniform member on each side.
struct ClassState {
  std::vector<Attribute> attrs;
  std::vector<std::size_t> uf;

  explicit ClassState(const Query& q) : attrs(q.all_attributes()), uf(attrs.size()) {
    std::iota(uf.begin(), uf.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  }

  std::vector<std::vector<std::size_t>> classes() {
    std::map<std::size_t, std::vector<std::size_t>> grouped;
    for (std::size_t i = 0; i < uf.size(); ++i) grouped[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : grouped) out.push_back(std::move(members));
    return out;
  }

  void place(Query& dst, std::size_t n, std::mt19937_64& rng) {
    for (std::size_t k = 0; k < n; ++k) {
      auto cls = classes();
      if (cls.size() < 2)
        throw SemanticError("no non-redundant equality remains to place");
      std::size_t i = rng() % cls.size();
      std::size_t j = rng() % (cls.size() - 1);
      if (j >= i) ++j;
      std::size_t a = cls[i][rng() % cls[i].size()];
      std::size_t b = cls[j][rng() % cls[j].size()];
      dst.equalities.emplace_back(attrs[a], attrs[b]);
      uf[find(a)] = find(b);
    }
  }
};

void append_random_relation(GeneratedInstance& out, const std::string& name,
                            std::size_t arity, std::size_t rows,
                            std::int64_t maxValue, std::mt19937_64& rng,
                            const ZipfTable* zipf) {
  std::vector<std::string> cols;
  for (std::size_t c = 0; c < arity; ++c) cols.push_back("a" + std::to_string(c + 1));
  Relation rel(name, cols);
  std::vector<Value> row(arity);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < arity; ++c)
      row[c] = Value::integer(zipf ? zipf->draw(rng) : uniform_draw(rng, maxValue));
    rel.add_row(row);
  }
  out.db.add(std::move(rel));
  out.query.atoms.push_back({name, name, cols});
}

}  // namespace

ZipfTable::ZipfTable(std::int64_t maxValue, double skew) {
  if (maxValue < 1) throw SemanticError("Zipf needs a positive value range");
  if (!(skew > 0)) throw SemanticError("Zipf skew must be positive");
  cum_.reserve(static_cast<std::size_t>(maxValue));
  double acc = 0;
  for (std::int64_t k = 1; k <= maxValue; ++k) {
    acc += 1.0 / std::pow(static_cast<double>(k), skew);
    cum_.push_back(acc);
  }
}

std::int64_t ZipfTable::draw(std::mt19937_64& rng) const {
  double u = unit_draw(rng) * cum_.back();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;
  return 1 + static_cast<std::int64_t>(it - cum_.begin());
}

GeneratedInstance generate(const GenSpec& spec) {
  if (spec.relations == 0) throw SemanticError("need at least one relation");
  if (spec.attributes < spec.relations)
    throw SemanticError("need at least one attribute per relation");
  if (spec.maxValue < 1) throw SemanticError("value range must be positive");
  if (spec.flatEqualities + spec.followupEqualities >= spec.attributes)
    throw SemanticError("equality count must stay below the attribute count");

  std::mt19937_64 rng(spec.seed);

  // Round-robin arities; the remainder goes to a shuffled prefix.
  std::vector<std::size_t> arity(spec.relations, spec.attributes / spec.relations);
  std::vector<std::size_t> order(spec.relations);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng() % i]);
  for (std::size_t k = 0; k < spec.attributes % spec.relations; ++k) ++arity[order[k]];

  std::optional<ZipfTable> zipf;
  if (spec.dist == GenSpec::Dist::Zipf) zipf.emplace(spec.maxValue, spec.skew);

  GeneratedInstance out;
  for (std::size_t r = 0; r < spec.relations; ++r)
    append_random_relation(out, "R" + std::to_string(r + 1), arity[r],
                           spec.tuplesPerRelation, spec.maxValue, rng,
                           zipf ? &*zipf : nullptr);

  ClassState cs(out.query);
  cs.place(out.query, spec.flatEqualities, rng);
  out.followup = out.query;
  cs.place(out.followup, spec.followupEqualities, rng);
  return out;
}

GeneratedInstance combinatorial_instance(std::size_t equalities,
                                         std::int64_t maxValue,
                                         std::uint64_t seed) {
  if (maxValue < 1) throw SemanticError("value range must be positive");
  if (equalities >= 10)
    throw SemanticError("equality count must stay below the attribute count");

  std::mt19937_64 rng(seed);
  GeneratedInstance out;
  static constexpr std::size_t kArities[4] = {2, 2, 3, 3};
  for (std::size_t r = 0; r < 4; ++r) {
    std::size_t rows = 1;
    for (std::size_t c = 0; c < kArities[r]; ++c) rows *= 8;
    append_random_relation(out, "R" + std::to_string(r + 1), kArities[r], rows,
                           maxValue, rng, nullptr);
  }
  ClassState cs(out.query);
  cs.place(out.query, equalities, rng);
  out.followup = out.query;
  return out;
}

// ---------------------------------------------------------------------------
// Experiment harness

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Deadline deadline_for(const ExperimentOptions& opts) {
  auto ms = std::chrono::milliseconds(
      static_cast<std::int64_t>(std::llround(opts.timeoutSeconds * 1000.0)));
  return Deadline::in(ms);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return ExperimentRow::kMissing;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return ExperimentRow::kMissing;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  if (v.size() % 2) return v[mid];
  return (v[mid - 1] + v[mid]) / 2.0;
}

/// Per-seed measurements of one cell, aggregated into a row at the end.
struct Samples {
  std::vector<double> optMs, fdbMs, flatMs;
  std::vector<double> plan, fin, fact, flat;
  std::size_t done = 0, timeouts = 0;
};

ExperimentRow finish_row(int exp, const GenSpec& cell, std::string algo,
                         const Samples& s) {
  ExperimentRow r;
  r.experiment = exp;
  r.cell = cell;
  r.algo = std::move(algo);
  r.seedsDone = s.done;
  r.timeouts = s.timeouts;
  r.optMsMean = mean(s.optMs);
  r.optMsMedian = median(s.optMs);
  r.planCost = mean(s.plan);
  r.finalCost = mean(s.fin);
  r.factSingletons = mean(s.fact);
  r.flatSingletons = mean(s.flat);
  r.fdbMsMean = mean(s.fdbMs);
  r.fdbMsMedian = median(s.fdbMs);
  r.flatMsMean = mean(s.flatMs);
  r.flatMsMedian = median(s.flatMs);
  return r;
}

/// Runs `cell` over every grid point, optionally on worker threads.  Rows
/// keep grid order regardless of scheduling; the first worker exception
/// is rethrown after the pool drains.
template <typename Fn>
std::vector<ExperimentRow> run_cells(const std::vector<GenSpec>& grid,
                                     const ExperimentOptions& opts, Fn cell) {
  std::vector<std::vector<ExperimentRow>> out(grid.size());
  if (opts.threads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = cell(grid[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex errMu;
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
        try {
          out[i] = cell(grid[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lk(errMu);
          if (!err) err = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(opts.threads, grid.size()); ++t)
      pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  std::vector<ExperimentRow> rows;
  for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<JoinCondition> followup_conditions(const GeneratedInstance& inst,
                                               std::size_t skip) {
  std::vector<JoinCondition> conds;
  for (std::size_t k = skip; k < inst.followup.equalities.size(); ++k) {
    const auto& eq = inst.followup.equalities[k];
    conds.emplace_back(eq.first.qualified(), eq.second.qualified());
  }
  return conds;
}

/// Index of the result column whose class contains the qualified
/// attribute.
std::size_t schema_column(const std::vector<std::string>& schema,
                          const std::string& attr) {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (class_contains(schema[i], attr)) return i;
  throw SemanticError("attribute " + attr + " not in the flat result schema");
}

}  // namespace

ExperimentReport experiment1(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = 1;
  rep.rows = run_cells(grid, opts, [&](const GenSpec& cell) {
    Samples s;
    for (std::size_t i = 0; i < opts.seedsPerCell; ++i) {
      GenSpec gs = cell;
      gs.seed = cell.seed + i;
      try {
        GeneratedInstance inst = generate(gs);
        auto t0 = Clock::now();
        FTree tree = optimal_ftree(inst.db, inst.query);
        double ms = ms_since(t0);
        if (ms > opts.timeoutSeconds * 1000.0) {
          ++s.timeouts;
          continue;
        }
        double cost = s_cost(tree).to_double();
        s.optMs.push_back(ms);
        s.plan.push_back(cost);
        s.fin.push_back(cost);
        ++s.done;
      } catch (const BudgetError&) {
        ++s.timeouts;
      }
    }
    return std::vector<ExperimentRow>{finish_row(1, cell, "optimal", s)};
  });
  return rep;
}

ExperimentReport experiment2(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = 2;
  rep.rows = run_cells(grid, opts, [&](const GenSpec& cell) {
    Samples se, sg;
    auto record = [](Samples& s, const FPlan& p, double ms) {
      s.optMs.push_back(ms);
      s.plan.push_back(p.boundCost.to_double());
      s.fin.push_back(p.finalCost.to_double());
      ++s.done;
    };
    for (std::size_t i = 0; i < opts.seedsPerCell; ++i) {
      GenSpec gs = cell;
      gs.seed = cell.seed + i;
      FTree base;
      std::vector<JoinCondition> conds;
      try {
        GeneratedInstance inst = generate(gs);
        base = optimal_ftree(inst.db, inst.query);
        conds = followup_conditions(inst, gs.flatEqualities);
      } catch (const BudgetError&) {
        ++se.timeouts;
        ++sg.timeouts;
        continue;
      }
      try {
        auto t0 = Clock::now();
        FPlan p = exhaustive_plan(base, conds, PlanOrder{},
                                  PlanSearchLimits{opts.stateBudget});
        double ms = ms_since(t0);
        if (ms > opts.timeoutSeconds * 1000.0)
          ++se.timeouts;
        else
          record(se, p, ms);
      } catch (const BudgetError&) {
        ++se.timeouts;
      }
      try {
        auto t0 = Clock::now();
        FPlan p = greedy_plan(base, conds);
        double ms = ms_since(t0);
        if (ms > opts.timeoutSeconds * 1000.0)
          ++sg.timeouts;
        else
          record(sg, p, ms);
      } catch (const BudgetError&) {
        ++sg.timeouts;
      }
    }
    return std::vector<ExperimentRow>{finish_row(2, cell, "exhaustive", se),
                                      finish_row(2, cell, "greedy", sg)};
  });
  return rep;
}

namespace {

/// Shared body of experiment 3: factorised evaluation always, flat
/// evaluation only when its row count fits the materialisation cap.
void run_exp3_seed(const GeneratedInstance& inst, const ExperimentOptions& opts,
                   const Deadline& dl, Samples& s) {
  auto t0 = Clock::now();
  FTree tree = optimal_ftree(inst.db, inst.query);
  double optMs = ms_since(t0);
  dl.check("optimisation");

  t0 = Clock::now();
  FRep rep = factorise(inst.db, inst.query, tree, dl);
  double fdbMs = ms_since(t0);

  std::size_t width = tuple_schema(tree).size();
  std::size_t flatRows = count_tuples(rep.root);
  double cost = s_cost(tree).to_double();
  s.optMs.push_back(optMs);
  s.fdbMs.push_back(fdbMs);
  s.fact.push_back(static_cast<double>(rep_size(rep)));
  s.flat.push_back(static_cast<double>(flatRows) * static_cast<double>(width));
  s.plan.push_back(cost);
  s.fin.push_back(cost);
  ++s.done;

  if (flatRows <= opts.maxFlatRows) {
    try {
      t0 = Clock::now();
      FlatResult fr = eval_flat(inst.db, inst.query, dl);
      s.flatMs.push_back(ms_since(t0));
      (void)fr;
    } catch (const BudgetError&) {
      ++s.timeouts;
    }
  } else {
    ++s.timeouts;  // flat point missing by the size policy
  }
}

}  // namespace

ExperimentReport experiment3(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = 3;
  rep.rows = run_cells(grid, opts, [&](const GenSpec& cell) {
    Samples s;
    for (std::size_t i = 0; i < opts.seedsPerCell; ++i) {
      GenSpec gs = cell;
      gs.seed = cell.seed + i;
      try {
        GeneratedInstance inst = generate(gs);
        run_exp3_seed(inst, opts, deadline_for(opts), s);
      } catch (const BudgetError&) {
        ++s.timeouts;
      }
    }
    return std::vector<ExperimentRow>{finish_row(3, cell, "optimal", s)};
  });
  return rep;
}

ExperimentReport experiment4(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = 4;
  rep.rows = run_cells(grid, opts, [&](const GenSpec& cell) {
    Samples s;
    for (std::size_t i = 0; i < opts.seedsPerCell; ++i) {
      GenSpec gs = cell;
      gs.seed = cell.seed + i;
      Deadline dl = deadline_for(opts);
      try {
        GeneratedInstance inst = generate(gs);
        // Both sides start from the already-evaluated base query; only
        // the follow-up work is timed.
        FTree tree = optimal_ftree(inst.db, inst.query);
        FRep base = factorise(inst.db, inst.query, tree, dl);
        std::vector<JoinCondition> conds =
            followup_conditions(inst, gs.flatEqualities);

        auto t0 = Clock::now();
        FPlan plan = greedy_plan(base.tree, conds);
        double optMs = ms_since(t0);
        t0 = Clock::now();
        FRep out = apply_plan(base, plan);
        double fdbMs = ms_since(t0);
        dl.check("follow-up evaluation");

        s.optMs.push_back(optMs);
        s.fdbMs.push_back(fdbMs);
        s.plan.push_back(plan.boundCost.to_double());
        s.fin.push_back(plan.finalCost.to_double());
        s.fact.push_back(static_cast<double>(rep_size(out)));
        ++s.done;

        if (count_tuples(base.root) <= opts.maxFlatRows) {
          FlatResult flatBase = eval_flat(inst.db, inst.query, dl);
          std::vector<std::pair<std::size_t, std::size_t>> colPairs;
          for (const auto& [a, b] : conds)
            colPairs.emplace_back(schema_column(flatBase.schema, a),
                                  schema_column(flatBase.schema, b));
          t0 = Clock::now();
          std::size_t kept = 0;
          for (const auto& row : flatBase.rows) {
            bool ok = true;
            for (const auto& [ca, cb] : colPairs)
              if (!(row[ca] == row[cb])) {
                ok = false;
                break;
              }
            if (ok) ++kept;
          }
          s.flatMs.push_back(ms_since(t0));
          s.flat.push_back(static_cast<double>(kept) *
                           static_cast<double>(flatBase.schema.size()));
        } else {
          ++s.timeouts;
        }
      } catch (const BudgetError&) {
        ++s.timeouts;
      }
    }
    return std::vector<ExperimentRow>{finish_row(4, cell, "greedy", s)};
  });
  return rep;
}

ExperimentReport combinatorial_experiment(std::size_t maxEqualities,
                                          const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = 3;
  for (std::size_t k = 1; k <= maxEqualities; ++k) {
    GenSpec cell;  // descriptive only; the instance is built directly
    cell.relations = 4;
    cell.attributes = 10;
    cell.tuplesPerRelation = 512;
    cell.maxValue = 20;
    cell.flatEqualities = k;
    cell.followupEqualities = 0;
    cell.seed = 1;
    Samples s;
    for (std::size_t i = 0; i < opts.seedsPerCell; ++i) {
      try {
        GeneratedInstance inst =
            combinatorial_instance(k, cell.maxValue, cell.seed + i);
        run_exp3_seed(inst, opts, deadline_for(opts), s);
      } catch (const BudgetError&) {
        ++s.timeouts;
      }
    }
    rep.rows.push_back(finish_row(3, cell, "optimal", s));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report output

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> row_values(const ExperimentRow& r) {
  const GenSpec& g = r.cell;
  return {std::to_string(r.experiment),
          std::to_string(g.relations),
          std::to_string(g.attributes),
          std::to_string(g.tuplesPerRelation),
          std::to_string(g.maxValue),
          g.dist == GenSpec::Dist::Zipf ? "zipf" : "uniform",
          fmt_double(g.skew),
          std::to_string(g.flatEqualities),
          std::to_string(g.followupEqualities),
          std::to_string(g.seed),
          r.algo,
          std::to_string(r.seedsDone),
          std::to_string(r.timeouts),
          fmt_double(r.optMsMean),
          fmt_double(r.optMsMedian),
          fmt_double(r.planCost),
          fmt_double(r.finalCost),
          fmt_double(r.factSingletons),
          fmt_double(r.flatSingletons),
          fmt_double(r.fdbMsMean),
          fmt_double(r.fdbMsMedian),
          fmt_double(r.flatMsMean),
          fmt_double(r.flatMsMedian)};
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> report_columns() {
  return {"exp",          "R",
          "A",            "n",
          "M",            "dist",
          "skew",         "K",
          "L",            "seed",
          "algo",         "seeds",
          "timeouts",     "opt_ms_mean",
          "opt_ms_median", "plan_cost",
          "final_cost",   "fact_singletons",
          "flat_singletons", "fdb_ms_mean",
          "fdb_ms_median", "flat_ms_mean",
          "flat_ms_median"};
}

std::string to_csv(const ExperimentReport& rep) {
  std::string out = join(report_columns(), ",") + "\n";
  for (const ExperimentRow& r : rep.rows) out += join(row_values(r), ",") + "\n";
  return out;
}

std::string to_dat(const ExperimentReport& rep, const std::string& xcol,
                   const std::vector<std::string>& ycols) {
  std::vector<std::string> cols = report_columns();
  auto index_of = [&](const std::string& name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw SemanticError("unknown report column " + name);
    return static_cast<std::size_t>(it - cols.begin());
  };
  std::vector<std::size_t> sel{index_of(xcol)};
  for (const std::string& y : ycols) sel.push_back(index_of(y));

  std::string out = "# " + xcol;
  for (const std::string& y : ycols) out += " " + y;
  out += "\n";
  for (const ExperimentRow& r : rep.rows) {
    std::vector<std::string> vals = row_values(r);
    std::vector<std::string> line;
    for (std::size_t i : sel) line.push_back(vals[i].empty() ? "nan" : vals[i]);
    out += join(line, " ") + "\n";
  }
  return out;
}

}  // namespace fdb
