#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "detail/evolution.hpp"

namespace maasim {

namespace {

// Pairwise distances in objective space scaled to the pool's extent.
std::vector<std::vector<double>> distance_matrix(const std::vector<Individual>& pool) {
  double lo_s = pool[0].obj.score, hi_s = lo_s;
  double lo_t = static_cast<double>(pool[0].obj.turns), hi_t = lo_t;
  for (const auto& a : pool) {
    lo_s = std::min(lo_s, a.obj.score);
    hi_s = std::max(hi_s, a.obj.score);
    lo_t = std::min(lo_t, static_cast<double>(a.obj.turns));
    hi_t = std::max(hi_t, static_cast<double>(a.obj.turns));
  }
  const double rs = hi_s > lo_s ? hi_s - lo_s : 1.0;
  const double rt = hi_t > lo_t ? hi_t - lo_t : 1.0;
  const std::size_t n = pool.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ds = (pool[i].obj.score - pool[j].obj.score) / rs;
      const double dt = (static_cast<double>(pool[i].obj.turns) - static_cast<double>(pool[j].obj.turns)) / rt;
      d[i][j] = d[j][i] = std::sqrt(ds * ds + dt * dt);
    }
  return d;
}

// Raw fitness (sum of strengths of dominators) plus k-th nearest neighbour
// density. Values below 1 mark non-dominated members.
std::vector<double> fitness(const std::vector<Individual>& pool, const std::vector<std::vector<double>>& dist) {
  const std::size_t n = pool.size();
  std::vector<std::size_t> strength(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dominates(pool[i].obj, pool[j].obj)) ++strength[i];
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  std::vector<double> f(n, 0.0);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    double raw = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (dominates(pool[j].obj, pool[i].obj)) raw += static_cast<double>(strength[j]);
    double sigma = 0.0;
    if (n > 1) {
      row.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) row.push_back(dist[i][j]);
      const std::size_t kk = std::min(k, row.size()) - 1;
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kk), row.end());
      sigma = row[kk];
    }
    f[i] = raw + 1.0 / (sigma + 2.0);
  }
  return f;
}

// Removes, one at a time, the member whose sorted neighbour distances are
// lexicographically smallest until `cap` remain. Returns surviving indices.
std::vector<std::size_t> truncate(std::vector<std::size_t> members, const std::vector<std::vector<double>>& dist,
                                  std::size_t cap) {
  // Sorted (distance, other) lists; entries for removed members are skipped.
  std::vector<std::vector<std::pair<double, std::size_t>>> lists(members.size());
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = 0; b < members.size(); ++b)
      if (a != b) lists[a].push_back({dist[members[a]][members[b]], b});
    std::sort(lists[a].begin(), lists[a].end());
  }
  std::vector<bool> alive(members.size(), true);
  std::size_t n_alive = members.size();

  auto less = [&](std::size_t a, std::size_t b) {
    auto ia = lists[a].begin(), ib = lists[b].begin();
    while (true) {
      while (ia != lists[a].end() && !alive[ia->second]) ++ia;
      while (ib != lists[b].end() && !alive[ib->second]) ++ib;
      if (ia == lists[a].end() || ib == lists[b].end()) return false;
      if (ia->first != ib->first) return ia->first < ib->first;
      ++ia;
      ++ib;
    }
  };

  while (n_alive > cap) {
    std::size_t victim = members.size();
    for (std::size_t a = 0; a < members.size(); ++a) {
      if (!alive[a]) continue;
      if (victim == members.size() || less(a, victim)) victim = a;
    }
    alive[victim] = false;
    --n_alive;
  }
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < members.size(); ++a)
    if (alive[a]) out.push_back(members[a]);
  return out;
}

struct Archive {
  std::vector<Individual> members;
  std::vector<double> fit;
};

Archive environmental_selection(const std::vector<Individual>& archive, const std::vector<Individual>& pop,
                                std::size_t cap) {
  std::vector<Individual> pool;
  std::set<Genome> seen;
  for (const auto* src : {&archive, &pop})
    for (const auto& ind : *src)
      if (seen.insert(ind.genome).second) pool.push_back(ind);

  const auto dist = distance_matrix(pool);
  const auto fit = fitness(pool, dist);

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (fit[i] < 1.0) chosen.push_back(i);
  if (chosen.size() > cap) {
    chosen = truncate(std::move(chosen), dist, cap);
  } else if (chosen.size() < cap) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (fit[i] >= 1.0) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](auto a, auto b) { return fit[a] < fit[b]; });
    for (std::size_t k = 0; k < rest.size() && chosen.size() < cap; ++k) chosen.push_back(rest[k]);
  }

  Archive out;
  for (auto i : chosen) {
    out.members.push_back(pool[i]);
    out.fit.push_back(fit[i]);
  }
  return out;
}

}  // namespace

Front spea2(const Problem& p, const AlgoConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.genome_length();
  detail::Rng rng(cfg.seed);
  detail::Evaluator eval(p, cfg.evaluations);
  const double pm = detail::mutation_rate(cfg, n);

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(eval(detail::random_genome(n, rng)));
  Archive archive;

  while (true) {
    archive = environmental_selection(archive.members, pop, cfg.archive);
    if (eval.exhausted()) break;

    auto tournament = [&]() -> const Individual& {
      const std::size_t a = detail::uniform_index(archive.members.size(), rng);
      const std::size_t b = detail::uniform_index(archive.members.size(), rng);
      return archive.members[archive.fit[b] < archive.fit[a] ? b : a];
    };
    const std::size_t n_children = std::min(cfg.population, eval.remaining());
    pop.clear();
    while (pop.size() < n_children) {
      const Individual& pa = tournament();
      const Individual& pb = tournament();
      auto [c, d] = detail::uniform_crossover(pa.genome, pb.genome, cfg.crossover_rate, rng);
      for (Genome* g : {&c, &d}) {
        if (pop.size() >= n_children) break;
        detail::mutate(*g, pm, rng);
        detail::repair(*g, rng);
        pop.push_back(eval(std::move(*g)));
      }
    }
  }
  return non_dominated(archive.members);
}

}  // namespace maasim
