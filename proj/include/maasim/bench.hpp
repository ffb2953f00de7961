#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maasim/metrics.hpp"
#include "maasim/moo.hpp"

namespace maasim {

struct BenchPlan {
  std::vector<Algorithm> algorithms{std::begin(kAlgorithms), std::end(kAlgorithms)};
  std::vector<std::size_t> budgets{10000, 20000};
  std::size_t runs = 10;
  std::uint64_t base_seed = 42;
  AlgoConfig algo;  // evaluations and seed are set per run
  std::size_t jobs = 0;  // 0: OpenMP default
  // When set, partial runs.csv is written there before an error propagates.
  std::optional<std::filesystem::path> out;

  void validate() const;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::nsga2;
  std::size_t budget = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  Front front;
  MetricReport metrics;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single run
};

inline constexpr const char* kBenchMetrics[] = {"spread", "spacing", "cardinality", "best_score", "min_turns"};

struct BenchResult {
  std::vector<RunRecord> runs;  // algorithm, then budget, then run index
  Front reference;
  bool reference_is_oracle = false;
  // (algorithm, budget) -> metric -> summary
  std::map<std::pair<std::string, std::size_t>, std::map<std::string, MetricSummary>> summary;
  // metric -> matrix over the largest budget; empty with fewer than 2 algorithms
  std::map<std::string, SignificanceMatrix> significance;
};

// Every (algorithm, budget, run) job uses seed base_seed + run. Jobs run in
// parallel; results are ordered canonically.
BenchResult run_bench(const Problem& p, const BenchPlan& plan);

double metric_value(const MetricReport& m, const std::string& metric);

std::string runs_csv(const std::vector<RunRecord>& runs);
std::string summary_csv(const BenchResult& r);
nlohmann::json summary_json(const BenchResult& r);

// runs.csv, summary.csv, summary.json, significance.json, reference.json
void write_bench_outputs(const BenchResult& r, const std::filesystem::path& dir);

}  // namespace maasim
