#include "maasim/bench.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include <omp.h>

namespace maasim {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + p.string() + "'");
  out << text;
}

struct Job {
  Algorithm algorithm;
  std::size_t budget;
  std::size_t run;
};

}  // namespace

void BenchPlan::validate() const {
  if (algorithms.empty()) throw ConfigError("bench: no algorithms");
  if (budgets.empty()) throw ConfigError("bench: no evaluation budgets");
  if (runs == 0) throw ConfigError("bench: runs must be at least 1");
  for (auto b : budgets)
    if (b < algo.population) throw ConfigError("bench: budget " + std::to_string(b) + " below the population size");
}

double metric_value(const MetricReport& m, const std::string& metric) {
  if (metric == "spread") return m.spread;
  if (metric == "spacing") return m.spacing;
  if (metric == "cardinality") return static_cast<double>(m.cardinality);
  if (metric == "best_score") return m.best_score;
  if (metric == "min_turns") return static_cast<double>(m.min_turns);
  throw ConfigError("unknown metric '" + metric + "'");
}

std::string runs_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "algorithm,evaluations,run,seed,spread,spread_degenerate,spacing,cardinality,best_score,min_turns\n";
  for (const auto& r : runs)
    out << to_string(r.algorithm) << ',' << r.budget << ',' << r.run << ',' << r.seed << ',' << fmt(r.metrics.spread)
        << ',' << (r.metrics.spread_degenerate ? 1 : 0) << ',' << fmt(r.metrics.spacing) << ','
        << r.metrics.cardinality << ',' << fmt(r.metrics.best_score) << ',' << r.metrics.min_turns << '\n';
  return out.str();
}

BenchResult run_bench(const Problem& p, const BenchPlan& plan) {
  plan.validate();
  std::vector<Job> jobs;
  for (auto a : plan.algorithms)
    for (auto b : plan.budgets)
      for (std::size_t r = 0; r < plan.runs; ++r) jobs.push_back({a, b, r});

  BenchResult result;
  result.runs.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<char> done(jobs.size(), 0);  // not vector<bool>: written from several threads
  const int threads = plan.jobs > 0 ? static_cast<int>(plan.jobs) : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(jobs.size()); ++i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    try {
      AlgoConfig cfg = plan.algo;
      cfg.evaluations = job.budget;
      cfg.seed = plan.base_seed + job.run;
      auto& rec = result.runs[static_cast<std::size_t>(i)];
      rec = {job.algorithm, job.budget, job.run, cfg.seed, run_algorithm(job.algorithm, p, cfg), {}};
      done[static_cast<std::size_t>(i)] = 1;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  const bool oracle = p.genome_length() <= kMaxBruteForceLength;
  if (oracle) {
    result.reference = brute_force_front(p);
  } else {
    std::vector<Individual> pool;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (done[i]) pool.insert(pool.end(), result.runs[i].front.begin(), result.runs[i].front.end());
    result.reference = non_dominated(pool);
  }
  result.reference_is_oracle = oracle;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (done[i]) result.runs[i].metrics = measure(result.runs[i].front, result.reference);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i]) continue;
    if (plan.out) {
      std::vector<RunRecord> partial;
      for (std::size_t k = 0; k < jobs.size(); ++k)
        if (done[k]) partial.push_back(result.runs[k]);
      std::filesystem::create_directories(*plan.out);
      write_text(*plan.out / "runs.csv", runs_csv(partial));
    }
    std::rethrow_exception(errors[i]);
  }

  for (auto a : plan.algorithms)
    for (auto b : plan.budgets) {
      auto& s = result.summary[{std::string(to_string(a)), b}];
      for (const char* metric : kBenchMetrics) {
        std::vector<double> v;
        for (const auto& r : result.runs)
          if (r.algorithm == a && r.budget == b) v.push_back(metric_value(r.metrics, metric));
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        s[metric] = {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
      }
    }

  if (plan.algorithms.size() >= 2) {
    std::size_t top = 0;
    for (auto b : plan.budgets) top = std::max(top, b);
    for (const char* metric : kBenchMetrics) {
      std::map<std::string, std::vector<double>> samples;
      for (const auto& r : result.runs)
        if (r.budget == top) samples[std::string(to_string(r.algorithm))].push_back(metric_value(r.metrics, metric));
      const std::string m = metric;
      const Better better = m == "cardinality" || m == "best_score" ? Better::higher : Better::lower;
      result.significance[m] = significance_matrix(samples, better);
    }
  }
  return result;
}

std::string summary_csv(const BenchResult& r) {
  std::ostringstream out;
  out << "algorithm,evaluations";
  for (const char* m : kBenchMetrics) out << ',' << m << "_mean," << m << "_sd";
  out << '\n';
  for (const auto& [key, metrics] : r.summary) {
    out << key.first << ',' << key.second;
    for (const char* m : kBenchMetrics) out << ',' << fmt(metrics.at(m).mean) << ',' << fmt(metrics.at(m).sd);
    out << '\n';
  }
  return out.str();
}

nlohmann::json summary_json(const BenchResult& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, metrics] : r.summary)
    for (const auto& [m, s] : metrics)
      j[key.first][std::to_string(key.second)][m] = {{"mean", s.mean}, {"sd", s.sd}};
  return {{"summary", std::move(j)},
          {"reference", {{"oracle", r.reference_is_oracle}, {"size", r.reference.size()}}}};
}

void write_bench_outputs(const BenchResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "runs.csv", runs_csv(r.runs));
  write_text(dir / "summary.csv", summary_csv(r));
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  nlohmann::json sig = nlohmann::json::object();
  for (const auto& [m, matrix] : r.significance) sig[m] = matrix.to_json();
  write_text(dir / "significance.json", sig.dump(2) + "\n");
  nlohmann::json ref = nlohmann::json::array();
  for (const auto& ind : r.reference)
    ref.push_back({{"genome", ind.genome.to_string()}, {"score", ind.obj.score}, {"turns", ind.obj.turns}});
  write_text(dir / "reference.json", ref.dump(2) + "\n");
}

}  // namespace maasim
