#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "maasim/fixtures.hpp"
#include "maasim/forest.hpp"

using namespace maasim;

namespace {

// Exhaustive greedy CART used as an oracle: every feature, every midpoint
// between consecutive distinct values, maximal variance reduction.
struct RefNode {
  double value = 0.0;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::unique_ptr<RefNode> left, right;
};

double sse(const std::vector<double>& y, const std::vector<std::size_t>& rows) {
  double m = 0.0;
  for (auto r : rows) m += y[r];
  m /= static_cast<double>(rows.size());
  double s = 0.0;
  for (auto r : rows) s += (y[r] - m) * (y[r] - m);
  return s;
}

std::unique_ptr<RefNode> ref_fit(const Matrix& x, const std::vector<double>& y, std::vector<std::size_t> rows) {
  auto node = std::make_unique<RefNode>();
  for (auto r : rows) node->value += y[r];
  node->value /= static_cast<double>(rows.size());
  const double parent = sse(y, rows);
  if (rows.size() < 2 || parent == 0.0) return node;
  double best = 0.0;
  std::vector<std::size_t> best_l, best_r;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (auto r : rows) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double t = (vals[i] + vals[i + 1]) / 2.0;
      std::vector<std::size_t> l, r;
      for (auto row : rows) (x(row, f) <= t ? l : r).push_back(row);
      const double gain = parent - sse(y, l) - sse(y, r);
      if (gain > best + 1e-12) {
        best = gain;
        node->feature = f;
        node->threshold = t;
        best_l = l;
        best_r = r;
      }
    }
  }
  if (best_l.empty()) return node;
  node->left = ref_fit(x, y, best_l);
  node->right = ref_fit(x, y, best_r);
  return node;
}

double ref_predict(const RefNode& n, std::span<const double> x) {
  if (!n.left) return n.value;
  return x[n.feature] <= n.threshold ? ref_predict(*n.left, x) : ref_predict(*n.right, x);
}

std::size_t ref_leaves(const RefNode& n) { return n.left ? ref_leaves(*n.left) + ref_leaves(*n.right) : 1; }

double training_macro_recall(const Forest& f, const Dataset& ds) {
  std::map<int, std::pair<std::size_t, std::size_t>> hits;  // class -> (correct, total)
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto& h = hits[ds.classes[r]];
    ++h.second;
    if (predict_class(f, ds.records.row(r)) == ds.classes[r]) ++h.first;
  }
  double sum = 0.0;
  for (const auto& [c, h] : hits) sum += static_cast<double>(h.first) / static_cast<double>(h.second);
  return sum / static_cast<double>(hits.size());
}

}  // namespace

TEST_CASE("constant target gives a single leaf") {
  Matrix x(5, 2);
  for (std::size_t r = 0; r < 5; ++r) x(r, 0) = double(r), x(r, 1) = double(r * r);
  const std::vector<double> y(5, 2.5);
  const auto t = fit_tree(x, y, {}, 1);
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.root().value == 2.5);
  CHECK(t.root().kind == NodeKind::leaf);
}

TEST_CASE("one binary feature separating the target gives a stump") {
  Matrix x(6, 1);
  std::vector<double> y;
  for (std::size_t r = 0; r < 6; ++r) {
    x(r, 0) = r % 2;
    y.push_back(r % 2 ? 2.0 : 1.0);
  }
  const auto t = fit_tree(x, y, {}, 1);
  CHECK(t.depth() == 1);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.predict(std::vector<double>{0.0}) == 1.0);
  CHECK(t.predict(std::vector<double>{1.0}) == 2.0);
  CHECK(t.root().value == 1.5);
  CHECK(t.root().impurity == doctest::Approx(0.25));
}

TEST_CASE("staircase tree matches the exhaustive-split reference") {
  Matrix x(20, 1);
  std::vector<double> y;
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = double(i);
    y.push_back(double(i / 5) + 1.0);
  }
  ForestConfig cfg;
  cfg.min_samples_leaf = 1;
  const auto t = fit_tree(x, y, cfg, 3);
  std::vector<std::size_t> all(20);
  std::iota(all.begin(), all.end(), 0);
  const auto ref = ref_fit(x, y, all);

  for (std::size_t i = 0; i < 20; ++i) CHECK(t.predict(x.row(i)) == y[i]);
  for (double v = -1.25; v < 21.0; v += 0.5) {
    const std::vector<double> q{v};
    CHECK(t.predict(q) == ref_predict(*ref, q));
  }
  std::size_t leaves = 0;
  for (const auto& n : t.nodes) leaves += n.kind == NodeKind::leaf;
  CHECK(leaves == ref_leaves(*ref));
  CHECK(leaves == 4);
}

TEST_CASE("node values are the means of the rows routed to them") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Matrix x(60, 3);
  std::vector<double> y;
  for (std::size_t r = 0; r < 60; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = n(rng);
    y.push_back(std::round(2.0 * x(r, 0) + x(r, 1)));
  }
  ForestConfig cfg;
  cfg.max_features = 3;
  cfg.min_samples_leaf = 3;
  const auto t = fit_tree(x, y, cfg, 2);
  // Route every row and recompute each node's mean and count.
  std::vector<double> sum(t.nodes.size(), 0.0);
  std::vector<std::size_t> count(t.nodes.size(), 0);
  for (std::size_t r = 0; r < 60; ++r) {
    std::size_t i = 0;
    while (true) {
      sum[i] += y[r];
      ++count[i];
      const auto& node = t.nodes[i];
      if (node.kind == NodeKind::leaf) break;
      i = static_cast<std::size_t>(x(r, node.feature) <= node.threshold ? node.left : node.right);
    }
  }
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    CHECK(count[i] == t.nodes[i].n_samples);
    CHECK(t.nodes[i].value == doctest::Approx(sum[i] / double(count[i])).epsilon(1e-12));
    CHECK(t.nodes[i].impurity >= 0.0);
    if (t.nodes[i].kind == NodeKind::leaf) CHECK(count[i] >= 3);
  }
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(fit_tree(Matrix(0, 2), std::vector<double>{}, {}, 1), EmptyDataError);
}

TEST_CASE("single unbootstrapped tree equals the forest") {
  const auto ds = generate_synthetic(fixtures::planted_config(2));
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.seed = 4;
  const auto f = fit_forest(ds, cfg);
  REQUIRE(f.trees.size() == 1);
  for (std::size_t r = 0; r < 50; ++r) CHECK(predict(f, ds.records.row(r)) == f.trees[0].predict(ds.records.row(r)));
}

TEST_CASE("forest training is deterministic") {
  const auto ds = generate_synthetic(fixtures::planted_config());
  ForestConfig cfg;
  cfg.seed = 8;
  const auto a = fit_forest(ds, cfg);
  const auto b = fit_forest(ds, cfg);
  CHECK(forest_to_json(a).dump() == forest_to_json(b).dump());
  CHECK(a.trees.size() == 100);
  cfg.seed = 9;
  CHECK(forest_to_json(fit_forest(ds, cfg)).dump() != forest_to_json(a).dump());
}

TEST_CASE("unbagged full-feature trees interpolate the training classes") {
  // Distinct rows and min_samples_leaf 1 give pure leaves in every tree.
  const auto ds = generate_synthetic(fixtures::planted_config());
  ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.bootstrap = false;
  cfg.max_features = ds.cols();
  const auto f = fit_forest(ds, cfg);
  CHECK(training_macro_recall(f, ds) == 1.0);
}

TEST_CASE("prediction averages trees") {
  auto f = test::forest_of({test::leaf_tree(3.4)}, 2);
  CHECK(predict(f, std::vector<double>{0, 0}) == 3.4);
  f = test::forest_of({test::leaf_tree(2.0), test::leaf_tree(4.0)}, 2);
  CHECK(predict(f, std::vector<double>{0, 0}) == 3.0);
  CHECK_THROWS_AS(predict(f, std::vector<double>{0}), ShapeError);
}

TEST_CASE("classes are truncated and clamped") {
  auto f = test::forest_of({test::leaf_tree(3.7)}, 1);
  CHECK(predict_class(f, std::vector<double>{0}) == 3);
  f = test::forest_of({test::leaf_tree(6.2)}, 1);
  CHECK(predict_class(f, std::vector<double>{0}) == 6);
  f = test::forest_of({test::leaf_tree(1.4)}, 1);
  f.class_range = {2, 6};
  CHECK(predict_class(f, std::vector<double>{0}) == 2);
}

TEST_CASE("decomposition walks the path") {
  auto f = test::forest_of({test::leaf_tree(2.5)}, 3);
  auto d = decompose(f, std::vector<double>{1, 2, 3});
  CHECK(d.bias == 2.5);
  CHECK(d.contributions == std::vector<double>{0, 0, 0});

  f = test::forest_of({test::stump(1, 0.5, 3.0, 1.0, 5.0)}, 3);
  d = decompose(f, std::vector<double>{0, 1, 0});
  CHECK(d.bias == 3.0);
  CHECK(d.contributions == std::vector<double>{0, 2, 0});
}

TEST_CASE("decomposition is exact on a trained forest") {
  const auto ds = generate_synthetic(fixtures::planted_config(3));
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 1;
  const auto f = fit_forest(ds, cfg);
  for (std::size_t r = 0; r < ds.rows(); r += 7) {
    const auto d = decompose(f, ds.records.row(r));
    double total = d.bias;
    for (double c : d.contributions) total += c;
    CHECK(std::abs(predict(f, ds.records.row(r)) - total) < 1e-9);
  }
}

TEST_CASE("importance of a forest splitting on one feature") {
  const auto f = test::forest_of({test::stump(2, 0.0, 3.0, 2.0, 4.0), test::stump(2, 1.0, 3.0, 2.5, 3.5)}, 4);
  CHECK(feature_importance(f) == std::vector<double>{0, 0, 1, 0});
  const auto pure = test::forest_of({test::leaf_tree(1.0)}, 3);
  CHECK(feature_importance(pure) == std::vector<double>{0, 0, 0});
}

TEST_CASE("importances sum to one and a noise feature stays below 0.01") {
  auto cfg = fixtures::planted_config(6);
  cfg.n_indicators = 21;
  cfg.n_noise = 1;
  cfg.names.clear();
  const auto ds = generate_synthetic(cfg);
  ForestConfig fc;
  fc.seed = 2;
  const auto imp = feature_importance(fit_forest(ds, fc));
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : imp) CHECK(v >= 0.0);
  CHECK(imp.back() < 0.01);
}

TEST_CASE("pruning removes the trailing unused features") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 4; ++i) rows.push_back({double(i), double(-i), double(i * i), 1.0 + i, 2.0 * i, 3.0 - i});
  const auto ds = test::make_dataset(rows, {1, 2, 3, 4});
  const auto f = test::forest_of({test::stump(0, 1.5, 2, 1, 3), test::stump(1, -1.5, 2, 1, 3), test::stump(2, 2.0, 2, 1, 3)}, 6);
  const auto [out, removed] = prune_by_importance(ds, f, 0.01);
  CHECK(removed == std::vector<std::string>{"f3", "f4", "f5"});
  CHECK(out.cols() == 3);

  const auto [same, none] = prune_by_importance(out, test::forest_of({test::stump(0, 1.5, 2, 1, 3),
                                                                       test::stump(1, -1.5, 2, 1, 3),
                                                                       test::stump(2, 2.0, 2, 1, 3)},
                                                                      3));
  CHECK(none.empty());
  CHECK(same == out);
  CHECK_THROWS_AS(prune_by_importance(ds, f, 2.0), EmptyDatasetError);
}

TEST_CASE("cross-validation on separable data is perfect") {
  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({i < 20 ? double(i) : 100.0 + i, i < 20 ? 0.5 * i : 50.0 + i});
    classes.push_back(i < 20 ? 2 : 4);
  }
  ForestConfig cfg;
  cfg.n_trees = 20;
  const auto rep = cross_validate(test::make_dataset(rows, classes), cfg, 10, 1);
  CHECK(rep.macro_recall == 1.0);
  CHECK(rep.k == 10);
  CHECK(rep.fold_assignments.size() == 40);
}

TEST_CASE("cross-validation on permuted labels is near chance") {
  auto ds = generate_synthetic(fixtures::planted_config(12));
  std::mt19937_64 rng(3);
  std::shuffle(ds.classes.begin(), ds.classes.end(), rng);
  ForestConfig cfg;
  cfg.n_trees = 30;
  const auto rep = cross_validate(ds, cfg, 10, 5);
  CHECK(std::abs(rep.macro_recall - 0.2) <= 0.1);
  double mean = 0.0;
  for (const auto& [c, r] : rep.per_class_recall) mean += r;
  CHECK(rep.macro_recall == doctest::Approx(mean / double(rep.per_class_recall.size())));
}

TEST_CASE("cross-validation needs k rows per class") {
  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  for (int i = 0; i < 15; ++i) rows.push_back({double(i)}), classes.push_back(i < 5 ? 1 : 2);
  CHECK_THROWS_AS(cross_validate(test::make_dataset(rows, classes), {}, 10, 1), StratificationError);
}

TEST_CASE("model files round-trip and reject bad input") {
  const auto ds = generate_synthetic(fixtures::planted_config(4));
  ForestConfig cfg;
  cfg.n_trees = 10;
  const auto f = fit_forest(ds, cfg);
  const auto dir = test::temp_dir("forest");
  save_model(f, dir / "m.json");
  const auto g = load_model(dir / "m.json");
  CHECK(g == f);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(5.0, 15.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(f.n_features);
    for (auto& v : x) v = u(rng);
    CHECK(predict(g, x) == predict(f, x));
  }

  const auto text = test::read_file(dir / "m.json");
  std::ofstream(dir / "cut.json") << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_model(dir / "cut.json"), FormatError);

  auto j = forest_to_json(f);
  j["version"] = 999;
  std::ofstream(dir / "v999.json") << j.dump();
  CHECK_THROWS_AS(load_model(dir / "v999.json"), VersionError);
}

TEST_CASE("derived seeds differ per stream") {
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) == derive_seed(1, 1));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
}
