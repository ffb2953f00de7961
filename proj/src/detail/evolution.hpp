#pragma once

// Shared plumbing for the evolutionary solvers: budgeted evaluation, random
// genomes and the variation operators.

#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>

#include "maasim/moo.hpp"

namespace maasim::detail {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Counts every call to the problem and refuses to go past the budget.
class Evaluator {
 public:
  Evaluator(const Problem& p, std::size_t budget) : p_(p), budget_(budget) {}

  std::size_t used() const noexcept { return used_; }
  std::size_t remaining() const noexcept { return budget_ - used_; }
  bool exhausted() const noexcept { return used_ >= budget_; }

  Individual operator()(Genome g) {
    if (exhausted()) throw std::logic_error("evaluation budget exceeded");
    ++used_;
    Objectives o = evaluate_genome(p_, g);
    return {std::move(g), o};
  }

 private:
  const Problem& p_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

// t > 0: an empty plan gets one random action.
inline void repair(Genome& g, Rng& rng) {
  if (g.size() > 0 && g.none()) g.flip(uniform_index(g.size(), rng));
}

inline Genome random_genome(std::size_t n, Rng& rng) {
  Genome g(n);
  for (std::size_t i = 0; i < n; ++i) g.set(i, uniform01(rng) < 0.5);
  repair(g, rng);
  return g;
}

inline double mutation_rate(const AlgoConfig& cfg, std::size_t n) {
  return cfg.mutation_rate.value_or(n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

inline void mutate(Genome& g, double rate, Rng& rng) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (uniform01(rng) < rate) g.flip(i);
}

inline std::pair<Genome, Genome> uniform_crossover(const Genome& a, const Genome& b, double rate, Rng& rng) {
  Genome c = a, d = b;
  if (uniform01(rng) < rate) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (uniform01(rng) < 0.5) {
        c.set(i, b[i]);
        d.set(i, a[i]);
      }
  }
  return {std::move(c), std::move(d)};
}

}  // namespace maasim::detail
