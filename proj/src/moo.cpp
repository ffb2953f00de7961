#include "maasim/moo.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#include "detail/moo_kernels.hpp"

namespace maasim {

void AlgoConfig::validate() const {
  if (population < 2) throw ConfigError("population must be at least 2");
  if (archive < 1) throw ConfigError("archive must be at least 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (evaluations < population) throw ConfigError("evaluations must be at least the population size");
  if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0))
    throw ConfigError("mutation rate must lie in [0, 1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("crossover rate must lie in [0, 1]");
}

SimulationProblem::SimulationProblem(const Forest& forest, const ActionCatalog& catalog, SessionState base)
    : forest_(&forest), catalog_(&catalog), base_(std::move(base)) {
  if (base_.current.size() != forest.n_features || base_.baseline.size() != forest.n_features)
    throw ShapeError("session width differs from the model");
}

std::pair<double, double> SimulationProblem::score_bounds() const {
  return {static_cast<double>(forest_->class_range.first), static_cast<double>(forest_->class_range.second)};
}

double SimulationProblem::score(const Genome& g) const {
  const auto x = plan_indicators(base_.baseline, base_.current, g, *catalog_);
  return predict(*forest_, x);
}

AdditiveProblem::AdditiveProblem(double base, std::vector<double> increments, std::pair<double, double> bounds)
    : base_(base), increments_(std::move(increments)), bounds_(bounds) {
  if (increments_.empty()) throw ConfigError("additive problem needs at least one action");
  if (!(bounds_.second > bounds_.first)) throw ConfigError("score bounds must be increasing");
}

double AdditiveProblem::score(const Genome& g) const {
  double s = base_;
  for (std::size_t i = 0; i < increments_.size(); ++i)
    if (g[i]) s += increments_[i];
  return s;
}

Objectives evaluate_genome(const Problem& p, const Genome& g) {
  if (g.size() != p.genome_length())
    throw ShapeError("genome length " + std::to_string(g.size()) + " differs from problem length " +
                     std::to_string(p.genome_length()));
  const std::size_t t = g.popcount();
  if (t == 0) throw InfeasibleError("the empty plan violates t > 0");
  return {p.score(g), t};
}

Objectives evaluate_genome(const Genome& g, const SessionState& base, const Forest& f, const ActionCatalog& catalog) {
  return evaluate_genome(SimulationProblem(f, catalog, base), g);
}

bool dominates(const Objectives& a, const Objectives& b) noexcept {
  return a.score >= b.score && a.turns <= b.turns && (a.score > b.score || a.turns < b.turns);
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Individual> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(pop[i].obj, pop[j].obj))
        dominated[i].push_back(j);
      else if (dominates(pop[j].obj, pop[i].obj))
        ++count[i];
    }
    if (count[i] == 0) fronts[0].push_back(i);
  }
  while (!fronts.back().empty()) {
    std::vector<std::size_t> next;
    for (auto i : fronts.back())
      for (auto j : dominated[i])
        if (--count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Individual> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, 0.0);
  if (n <= 2) {
    std::fill(d.begin(), d.end(), inf);
    return d;
  }
  auto pass = [&](auto value) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return value(a) < value(b); });
    d[idx.front()] = inf;
    d[idx.back()] = inf;
    const double range = value(idx.back()) - value(idx.front());
    if (range <= 0.0) return;
    for (std::size_t k = 1; k + 1 < n; ++k) d[idx[k]] += (value(idx[k + 1]) - value(idx[k - 1])) / range;
  };
  pass([&](std::size_t i) { return front[i].obj.score; });
  pass([&](std::size_t i) { return static_cast<double>(front[i].obj.turns); });
  return d;
}

Front non_dominated(std::span<const Individual> pop) {
  const auto keep = detail::non_dominated_mask(pop);
  Front out;
  std::set<Genome> seen;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (keep[i] && seen.insert(pop[i].genome).second) out.push_back(pop[i]);
  return out;
}

bool is_valid_front(std::span<const Individual> front) {
  std::set<Genome> seen;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (!seen.insert(front[i].genome).second) return false;
    for (std::size_t j = 0; j < front.size(); ++j)
      if (i != j && dominates(front[j].obj, front[i].obj)) return false;
  }
  return true;
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::nsga2:
      return "nsga2";
    case Algorithm::paes:
      return "paes";
    case Algorithm::spea2:
      return "spea2";
    case Algorithm::epsmoea:
      return "epsmoea";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view s) {
  for (auto a : kAlgorithms)
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

Front run_algorithm(Algorithm a, const Problem& p, const AlgoConfig& cfg) {
  switch (a) {
    case Algorithm::nsga2:
      return nsga2(p, cfg);
    case Algorithm::paes:
      return paes(p, cfg);
    case Algorithm::spea2:
      return spea2(p, cfg);
    case Algorithm::epsmoea:
      return epsmoea(p, cfg);
  }
  throw ConfigError("unknown algorithm");
}

Front brute_force_front(const Problem& p) {
  const std::size_t n = detail::check_brute_force_length(p);
  const std::uint64_t count = (std::uint64_t{1} << n) - 1;
  std::vector<Individual> all(count);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < static_cast<std::int64_t>(count); ++m) {
    try {
      Genome g = Genome::from_mask(static_cast<std::uint64_t>(m) + 1, n);
      const Objectives o = evaluate_genome(p, g);
      all[static_cast<std::size_t>(m)] = {std::move(g), o};
    } catch (...) {
#pragma omp critical(maasim_brute_force)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return non_dominated(all);
}

void sort_front(Front& f) {
  std::sort(f.begin(), f.end(), [](const Individual& a, const Individual& b) {
    if (a.obj.turns != b.obj.turns) return a.obj.turns < b.obj.turns;
    if (a.obj.score != b.obj.score) return a.obj.score > b.obj.score;
    return a.genome < b.genome;
  });
}

nlohmann::json run_to_json(Algorithm a, std::uint64_t seed, std::size_t evaluations, const Front& front) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& ind : front)
    members.push_back({{"genome", ind.genome.to_string()}, {"score", ind.obj.score}, {"turns", ind.obj.turns}});
  return {{"algorithm", to_string(a)}, {"seed", seed}, {"evaluations", evaluations}, {"front", std::move(members)}};
}

}  // namespace maasim
