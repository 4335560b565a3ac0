#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fdb/catalog.hpp"

namespace fdb {

/// Parameters of one synthetic join instance.  Attributes are spread over
/// the relations round-robin; the remainder goes to a random subset, so
/// arities differ by at most one.  Equality counts must satisfy
/// flatEqualities + followupEqualities < attributes, because each equality
/// merges two distinct attribute classes and one class must survive.
struct GenSpec {
  std::size_t relations = 2;
  std::size_t attributes = 4;
  std::size_t tuplesPerRelation = 10;
  std::int64_t maxValue = 10;

  enum class Dist { Uniform, Zipf };
  Dist dist = Dist::Uniform;
  double skew = 1.0;  // Zipf exponent, ignored for Uniform

  std::size_t flatEqualities = 1;      // placed in the base query
  std::size_t followupEqualities = 0;  // added on top in the follow-up
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  Database db;
  Query query;     // joins all relations with flatEqualities conditions
  Query followup;  // query plus followupEqualities more conditions
};

/// Deterministic in spec.seed: equal specs produce byte-identical
/// databases and queries.  Every equality is non-redundant at the time it
/// is placed (its two sides lie in different classes).
GeneratedInstance generate(const GenSpec& spec);

/// Inverse-CDF sampler for P(value = k) proportional to 1/k^skew over
/// k in [1, maxValue].
class ZipfTable {
 public:
  ZipfTable(std::int64_t maxValue, double skew);
  std::int64_t draw(std::mt19937_64& rng) const;

 private:
  std::vector<double> cum_;
};

/// Mixed-arity join instance used for the combinatorial evaluation: two
/// binary relations with 8^2 tuples and two ternary ones with 8^3, values
/// uniform in [1, maxValue], joined by `equalities` non-redundant
/// conditions.  The flat result typically dwarfs the factorised one.
GeneratedInstance combinatorial_instance(std::size_t equalities,
                                         std::int64_t maxValue,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment harness

/// One output row: the cell parameters plus aggregated measurements.
/// Unused metrics stay NaN and print as empty CSV fields.
struct ExperimentRow {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  int experiment = 0;
  GenSpec cell;             // seed = the cell's base seed
  std::string algo;         // optimal | exhaustive | greedy
  std::size_t seedsDone = 0;
  std::size_t timeouts = 0;  // missing per-seed measurements, any cause

  double optMsMean = kMissing, optMsMedian = kMissing;    // search time
  double planCost = kMissing;   // bound reported by the search
  double finalCost = kMissing;  // s of the final tree
  double factSingletons = kMissing;  // factorised result size
  double flatSingletons = kMissing;  // flat result size (rows * width)
  double fdbMsMean = kMissing, fdbMsMedian = kMissing;    // factorised eval
  double flatMsMean = kMissing, flatMsMedian = kMissing;  // flat eval
};

struct ExperimentReport {
  int experiment = 0;
  std::vector<ExperimentRow> rows;
};

struct ExperimentOptions {
  std::size_t seedsPerCell = 5;
  double timeoutSeconds = 100.0;   // per seed; expiry makes the point missing
  std::size_t threads = 1;         // cells may run in parallel workers
  std::size_t maxFlatRows = 500'000;  // larger flat results are never built
  std::size_t stateBudget = 1'000'000;
};

/// Optimal f-tree search time and cost over the grid, one row per cell.
ExperimentReport experiment1(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts = {});

/// Exhaustive vs greedy plan search for the follow-up conditions on the
/// base query's optimal f-tree: two rows per cell.
ExperimentReport experiment2(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts = {});

/// Factorised vs flat evaluation of the base query: sizes and times.  The
/// flat size is computed by counting, and only materialised for timing
/// when it fits under opts.maxFlatRows.
ExperimentReport experiment3(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts = {});

/// Follow-up evaluation on already-computed results: greedy plan plus
/// replay on the factorised side, a selection scan on the flat side.
ExperimentReport experiment4(const std::vector<GenSpec>& grid,
                             const ExperimentOptions& opts = {});

/// The combinatorial cell as an experiment-3 style report, one row per
/// equality count in [1, maxEqualities].
ExperimentReport combinatorial_experiment(std::size_t maxEqualities = 4,
                                          const ExperimentOptions& opts = {});

/// Fixed CSV column set shared by all experiments (docs/reports.md).
std::vector<std::string> report_columns();
std::string to_csv(const ExperimentReport& rep);
/// Gnuplot-friendly whitespace table of the selected columns, '#' header.
std::string to_dat(const ExperimentReport& rep, const std::string& xcol,
                   const std::vector<std::string>& ycols);

}  // namespace fdb
