#include <algorithm>
#include <numeric>

#include "detail/evolution.hpp"

namespace maasim {

namespace {

struct Ranked {
  std::vector<std::size_t> rank;
  std::vector<double> crowd;
};

Ranked rank_population(std::span<const Individual> pop) {
  Ranked r{std::vector<std::size_t>(pop.size()), std::vector<double>(pop.size())};
  const auto fronts = non_dominated_sort(pop);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<Individual> members;
    for (auto i : fronts[f]) members.push_back(pop[i]);
    const auto d = crowding_distance(members);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      r.rank[fronts[f][k]] = f;
      r.crowd[fronts[f][k]] = d[k];
    }
  }
  return r;
}

// Elitist reduction of parents + offspring to `size` by rank, then crowding.
std::vector<Individual> select_survivors(std::vector<Individual> pool, std::size_t size) {
  std::vector<Individual> out;
  for (const auto& front : non_dominated_sort(pool)) {
    if (out.size() + front.size() <= size) {
      for (auto i : front) out.push_back(pool[i]);
      continue;
    }
    std::vector<Individual> members;
    for (auto i : front) members.push_back(pool[i]);
    const auto d = crowding_distance(members);
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] > d[b]; });
    for (std::size_t k = 0; out.size() < size; ++k) out.push_back(members[order[k]]);
    break;
  }
  return out;
}

}  // namespace

Front nsga2(const Problem& p, const AlgoConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.genome_length();
  detail::Rng rng(cfg.seed);
  detail::Evaluator eval(p, cfg.evaluations);
  const double pm = detail::mutation_rate(cfg, n);

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(eval(detail::random_genome(n, rng)));

  while (!eval.exhausted()) {
    const Ranked r = rank_population(pop);
    auto tournament = [&]() -> const Individual& {
      const std::size_t a = detail::uniform_index(pop.size(), rng);
      const std::size_t b = detail::uniform_index(pop.size(), rng);
      if (r.rank[a] != r.rank[b]) return pop[r.rank[a] < r.rank[b] ? a : b];
      if (r.crowd[a] != r.crowd[b]) return pop[r.crowd[a] > r.crowd[b] ? a : b];
      return pop[detail::uniform01(rng) < 0.5 ? a : b];
    };

    const std::size_t n_children = std::min(cfg.population, eval.remaining());
    std::vector<Individual> pool = pop;
    while (pool.size() < pop.size() + n_children) {
      const Individual& pa = tournament();
      const Individual& pb = tournament();
      auto [c, d] = detail::uniform_crossover(pa.genome, pb.genome, cfg.crossover_rate, rng);
      for (Genome* g : {&c, &d}) {
        if (pool.size() >= pop.size() + n_children) break;
        detail::mutate(*g, pm, rng);
        detail::repair(*g, rng);
        pool.push_back(eval(std::move(*g)));
      }
    }
    pop = select_survivors(std::move(pool), cfg.population);
  }
  return non_dominated(pop);
}

}  // namespace maasim
