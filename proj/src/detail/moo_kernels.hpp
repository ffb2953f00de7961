#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "maasim/moo.hpp"

namespace maasim::detail {

inline std::size_t check_brute_force_length(const Problem& p) {
  const std::size_t n = p.genome_length();
  if (n > kMaxBruteForceLength)
    throw TooLargeError("brute force needs genome length <= " + std::to_string(kMaxBruteForceLength) + ", got " +
                        std::to_string(n));
  if (n == 0) throw ConfigError("empty genome");
  return n;
}

// keep[i] is true when nothing in pop dominates pop[i]. O(n log n): sweep by
// score descending, tracking the fewest turns seen at strictly higher score.
inline std::vector<bool> non_dominated_mask(std::span<const Individual> pop) {
  const std::size_t n = pop.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    if (pop[a].obj.score != pop[b].obj.score) return pop[a].obj.score > pop[b].obj.score;
    return a < b;
  });
  std::vector<bool> keep(n, false);
  std::size_t best_higher = static_cast<std::size_t>(-1);
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s;
    std::size_t group_min = static_cast<std::size_t>(-1);
    while (e < n && pop[idx[e]].obj.score == pop[idx[s]].obj.score) {
      group_min = std::min(group_min, pop[idx[e]].obj.turns);
      ++e;
    }
    for (std::size_t k = s; k < e; ++k) {
      const std::size_t t = pop[idx[k]].obj.turns;
      keep[idx[k]] = t < best_higher && t == group_min;
    }
    best_higher = std::min(best_higher, group_min);
    s = e;
  }
  return keep;
}

}  // namespace maasim::detail
