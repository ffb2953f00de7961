// Serial reference for the brute-force oracle.

#include "detail/moo_kernels.hpp"

namespace maasim::serial {

Front brute_force_front(const Problem& p) {
  const std::size_t n = detail::check_brute_force_length(p);
  const std::uint64_t count = (std::uint64_t{1} << n) - 1;
  std::vector<Individual> all;
  all.reserve(count);
  for (std::uint64_t m = 1; m <= count; ++m) {
    Genome g = Genome::from_mask(m, n);
    const Objectives o = evaluate_genome(p, g);
    all.push_back({std::move(g), o});
  }
  return non_dominated(all);
}

}  // namespace maasim::serial
