// Parallel kernels against their serial references. Several threads are
// forced so the parallel paths run even on a single-core machine.
#include <omp.h>

#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "maasim/fixtures.hpp"
#include "maasim/forest.hpp"
#include "maasim/moo.hpp"
#include "maasim/preprocess.hpp"

using namespace maasim;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

struct Threads {
  explicit Threads(int n) : before(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(before); }
  int before;
};

}  // namespace

TEST_CASE("nearest neighbours") {
  const Threads t(4);
  const auto x = random_matrix(300, 6, 1);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < 300; i += 2) members.push_back(i);
  CHECK(nearest_neighbours(x, members, 5) == serial::nearest_neighbours(x, members, 5));
  // duplicated rows exercise the index tie-break
  Matrix dup(0, 2);
  for (int i = 0; i < 20; ++i) dup.append_row(std::vector<double>{double(i % 4), 0.0});
  std::vector<std::size_t> all(20);
  std::iota(all.begin(), all.end(), 0);
  CHECK(nearest_neighbours(dup, all, 7) == serial::nearest_neighbours(dup, all, 7));
}

TEST_CASE("correlation matrix") {
  const Threads t(4);
  const auto x = random_matrix(500, 30, 2);
  std::vector<std::string> names;
  for (int i = 0; i < 30; ++i) names.push_back("c" + std::to_string(i));
  const auto a = correlation_matrix(x, names), b = serial::correlation_matrix(x, names);
  CHECK(a.names == b.names);
  CHECK(a.values == b.values);
}

TEST_CASE("forest fitting and batch prediction") {
  const Threads t(4);
  const auto ds = generate_synthetic(fixtures::planted_config(13));
  ForestConfig cfg;
  cfg.n_trees = 24;
  cfg.seed = 6;
  const auto a = fit_forest(ds, cfg), b = serial::fit_forest(ds, cfg);
  CHECK(forest_to_json(a).dump() == forest_to_json(b).dump());
  const auto p = predict_batch(a, ds.records), q = serial::predict_batch(a, ds.records);
  CHECK(p == q);
  for (std::size_t r = 0; r < ds.rows(); r += 97) CHECK(p[r] == predict(a, ds.records.row(r)));
}

TEST_CASE("exhaustive front") {
  const Threads t(4);
  const auto g = fixtures::plateau_game();
  const SimulationProblem p(g.forest, g.catalog, g.session());
  CHECK(brute_force_front(p) == serial::brute_force_front(p));
  const AdditiveProblem add(1.0, {0.3, 0.1, 0.2, 0.05, 0.4, 0.15, 0.25, 0.35, 0.01, 0.02, 0.5, 0.07, 0.09, 0.11});
  CHECK(brute_force_front(add) == serial::brute_force_front(add));
}
