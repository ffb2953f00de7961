#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "detail/evolution.hpp"

namespace maasim {

namespace {

// Both objectives as minimisation in [0, 1]: score against the problem's
// bounds, turns against [1, n].
struct Boxer {
  double lo, hi, n, eps;

  std::array<double, 2> normalised(const Objectives& o) const {
    const double f1 = (hi - o.score) / (hi - lo);
    const double f2 = n > 1.0 ? (static_cast<double>(o.turns) - 1.0) / (n - 1.0) : 0.0;
    return {f1, f2};
  }
  std::array<std::int64_t, 2> box(const Objectives& o) const {
    const auto f = normalised(o);
    return {static_cast<std::int64_t>(std::floor(f[0] / eps)), static_cast<std::int64_t>(std::floor(f[1] / eps))};
  }
  double corner_distance(const Objectives& o) const {
    const auto f = normalised(o);
    const auto b = box(o);
    const double d0 = f[0] - static_cast<double>(b[0]) * eps;
    const double d1 = f[1] - static_cast<double>(b[1]) * eps;
    return std::sqrt(d0 * d0 + d1 * d1);
  }
};

bool box_dominates(const std::array<std::int64_t, 2>& a, const std::array<std::int64_t, 2>& b) {
  return a[0] <= b[0] && a[1] <= b[1] && a != b;
}

// Returns true when the child entered the archive.
bool archive_accept(std::vector<Individual>& archive, const Individual& child, const Boxer& boxer) {
  const auto b = boxer.box(child.obj);
  for (const auto& a : archive)
    if (a.genome == child.genome || box_dominates(boxer.box(a.obj), b)) return false;
  for (auto& a : archive) {
    if (boxer.box(a.obj) != b) continue;
    if (dominates(child.obj, a.obj)) {
      a = child;
      return true;
    }
    if (dominates(a.obj, child.obj)) return false;
    if (boxer.corner_distance(child.obj) < boxer.corner_distance(a.obj)) {
      a = child;
      return true;
    }
    return false;
  }
  std::erase_if(archive, [&](const auto& a) { return box_dominates(b, boxer.box(a.obj)); });
  archive.push_back(child);
  return true;
}

void population_accept(std::vector<Individual>& pop, const Individual& child, detail::Rng& rng) {
  std::vector<std::size_t> worse;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (dominates(child.obj, pop[i].obj)) worse.push_back(i);
  }
  if (!worse.empty()) {
    pop[worse[detail::uniform_index(worse.size(), rng)]] = child;
    return;
  }
  for (const auto& q : pop)
    if (dominates(q.obj, child.obj)) return;
  pop[detail::uniform_index(pop.size(), rng)] = child;
}

}  // namespace

Front epsmoea(const Problem& p, const AlgoConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.genome_length();
  const auto [lo, hi] = p.score_bounds();
  if (!(hi > lo)) throw ConfigError("score bounds must be increasing");
  const Boxer boxer{lo, hi, static_cast<double>(n), cfg.epsilon};
  detail::Rng rng(cfg.seed);
  detail::Evaluator eval(p, cfg.evaluations);
  const double pm = detail::mutation_rate(cfg, n);

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(eval(detail::random_genome(n, rng)));
  std::vector<Individual> archive;
  for (const auto& ind : non_dominated(pop)) archive_accept(archive, ind, boxer);

  while (!eval.exhausted()) {
    const std::size_t a = detail::uniform_index(pop.size(), rng);
    const std::size_t b = detail::uniform_index(pop.size(), rng);
    std::size_t pick;
    if (dominates(pop[a].obj, pop[b].obj))
      pick = a;
    else if (dominates(pop[b].obj, pop[a].obj))
      pick = b;
    else
      pick = detail::uniform01(rng) < 0.5 ? a : b;
    const Individual& mate = archive[detail::uniform_index(archive.size(), rng)];

    Genome child = detail::uniform_crossover(pop[pick].genome, mate.genome, cfg.crossover_rate, rng).first;
    detail::mutate(child, pm, rng);
    detail::repair(child, rng);
    const Individual c = eval(std::move(child));
    population_accept(pop, c, rng);
    archive_accept(archive, c, boxer);
  }
  return archive;
}

}  // namespace maasim
