#include "maasim/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "detail/forest_kernels.hpp"
#include "maasim/preprocess.hpp"

namespace maasim {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  // splitmix64 finaliser over (base, stream)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

struct NodeStats {
  double mean = 0.0;
  double variance = 0.0;
  bool pure = true;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const ForestConfig& cfg, std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), rng_(seed), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    tree_.nodes.reserve(2 * samples_.size() / std::max<std::size_t>(cfg_.min_samples_leaf, 1) + 1);
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse = INFINITY;
    bool found = false;
  };

  NodeStats stats(std::size_t begin, std::size_t end) const {
    NodeStats s;
    const double n = static_cast<double>(end - begin);
    const double first = y_[samples_[begin]];
    for (std::size_t i = begin; i < end; ++i) {
      s.mean += y_[samples_[i]];
      if (y_[samples_[i]] != first) s.pure = false;
    }
    s.mean /= n;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = y_[samples_[i]] - s.mean;
      s.variance += d * d;
    }
    s.variance = s.pure ? 0.0 : s.variance / n;
    return s;
  }

  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto node_index = static_cast<std::int32_t>(tree_.nodes.size());
    const auto st = stats(begin, end);
    const std::size_t n = end - begin;
    tree_.nodes.push_back({NodeKind::leaf, 0, 0.0, -1, -1, st.mean, n, st.variance});

    const bool depth_limited = cfg_.max_depth && depth >= *cfg_.max_depth;
    if (st.pure || depth_limited || n < 2 * cfg_.min_samples_leaf) return node_index;

    const Split split = best_split(begin, end);
    if (!split.found) return node_index;

    const auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::size_t r) { return x_(r, split.feature) <= split.threshold; });
    const auto split_at = static_cast<std::size_t>(mid - samples_.begin());

    const auto left = grow(begin, split_at, depth + 1);
    const auto right = grow(split_at, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    node.kind = NodeKind::split;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_index;
  }

  Split best_split(std::size_t begin, std::size_t end) {
    Split best;
    const std::size_t p = features_.size();
    const std::size_t n = end - begin;
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_samples_leaf, 1);
    std::size_t visited = 0;
    // Draw features without replacement until max_features non-constant ones
    // have been examined.
    for (std::size_t i = 0; i < p && visited < *cfg_.max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(features_[i], features_[pick(rng_)]);
      const std::size_t f = features_[i];

      scratch_.clear();
      for (std::size_t s = begin; s < end; ++s) scratch_.emplace_back(x_(samples_[s], f), y_[samples_[s]]);
      std::sort(scratch_.begin(), scratch_.end());
      if (scratch_.front().first == scratch_.back().first) continue;
      ++visited;

      double total = 0.0, total_sq = 0.0;
      for (const auto& [v, t] : scratch_) {
        total += t;
        total_sq += t * t;
      }
      double left = 0.0, left_sq = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left += scratch_[k].second;
        left_sq += scratch_[k].second * scratch_[k].second;
        if (scratch_[k].first == scratch_[k + 1].first) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right = total - left;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left * left / static_cast<double>(nl)) +
                           (right_sq - right * right / static_cast<double>(nr));
        if (sse < best.sse) {
          const double lo = scratch_[k].first;
          const double hi = scratch_[k + 1].first;
          double thr = lo + (hi - lo) / 2.0;
          if (!(thr < hi)) thr = lo;
          best = {f, thr, sse, true};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const ForestConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> samples_;
  std::vector<std::pair<double, double>> scratch_;
  Tree tree_;
};

std::size_t route(const Tree& t, std::span<const double> x) {
  std::size_t node = 0;
  while (t.nodes[node].kind == NodeKind::split) {
    const auto& nd = t.nodes[node];
    node = static_cast<std::size_t>(x[nd.feature] <= nd.threshold ? nd.left : nd.right);
  }
  return node;
}

void check_width(const Forest& f, std::span<const double> x) {
  if (x.size() != f.n_features)
    throw ShapeError("input has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(f.n_features));
}

}  // namespace

std::size_t Tree::leaf_for(std::span<const double> x) const { return route(*this, x); }

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes[i].kind == NodeKind::split) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

namespace detail {

ForestConfig resolve_config(const ForestConfig& cfg, std::size_t n_features) {
  ForestConfig out = cfg;
  if (out.n_trees == 0) throw ConfigError("forest: n_trees must be at least 1");
  if (n_features == 0) throw EmptyDataError("forest: no features");
  if (!out.max_features)
    out.max_features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  if (*out.max_features < 1 || *out.max_features > n_features)
    throw ConfigError("forest: max_features must lie in [1, n_features]");
  if (out.min_samples_leaf == 0) throw ConfigError("forest: min_samples_leaf must be at least 1");
  return out;
}

Tree fit_forest_tree(const Matrix& x, std::span<const double> y, const ForestConfig& resolved, std::size_t index) {
  const std::uint64_t seed = derive_seed(resolved.seed, index);
  std::vector<std::size_t> samples(x.rows());
  if (resolved.bootstrap) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
    for (auto& s : samples) s = pick(rng);
    std::sort(samples.begin(), samples.end());
  } else {
    std::iota(samples.begin(), samples.end(), std::size_t{0});
  }
  return TreeBuilder(x, y, resolved, derive_seed(seed, 1)).build(std::move(samples));
}

Forest make_forest_shell(const Dataset& ds, const ForestConfig& resolved) {
  if (ds.rows() == 0) throw EmptyDataError("forest: empty training set");
  Forest f;
  f.config = resolved;
  f.n_features = ds.cols();
  f.feature_names = ds.names();
  const auto [lo, hi] = std::minmax_element(ds.classes.begin(), ds.classes.end());
  f.class_range = {*lo, *hi};
  f.trees.resize(resolved.n_trees);
  return f;
}

}  // namespace detail

Tree fit_tree(const Matrix& x, std::span<const double> y, const ForestConfig& cfg, std::uint64_t seed) {
  if (x.rows() == 0 || y.empty()) throw EmptyDataError("fit_tree: empty input");
  if (x.rows() != y.size()) throw ShapeError("fit_tree: X and y disagree on row count");
  const auto resolved = detail::resolve_config(cfg, x.cols());
  std::vector<std::size_t> samples(x.rows());
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  return TreeBuilder(x, y, resolved, seed).build(std::move(samples));
}

Forest fit_forest(const Dataset& ds, const ForestConfig& cfg) {
  const auto resolved = detail::resolve_config(cfg, ds.cols());
  Forest f = detail::make_forest_shell(ds, resolved);
  const auto y = ds.targets();
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(resolved.n_trees); ++t)
    f.trees[static_cast<std::size_t>(t)] = detail::fit_forest_tree(ds.records, y, resolved, static_cast<std::size_t>(t));
  return f;
}

double predict(const Forest& f, std::span<const double> x) {
  check_width(f, x);
  double sum = 0.0;
  for (const auto& t : f.trees) sum += t.predict(x);
  return sum / static_cast<double>(f.trees.size());
}

int predict_class(const Forest& f, std::span<const double> x) {
  const double v = std::floor(predict(f, x));
  return static_cast<int>(std::clamp(v, static_cast<double>(f.class_range.first),
                                     static_cast<double>(f.class_range.second)));
}

std::vector<double> predict_batch(const Forest& f, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != f.n_features) throw ShapeError("predict_batch: width mismatch");
  std::vector<double> out(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(x.rows()); ++r)
    out[static_cast<std::size_t>(r)] = predict(f, x.row(static_cast<std::size_t>(r)));
  return out;
}

Decomposition decompose(const Forest& f, std::span<const double> x) {
  check_width(f, x);
  Decomposition d;
  d.contributions.assign(f.n_features, 0.0);
  for (const auto& t : f.trees) {
    d.bias += t.root().value;
    std::size_t node = 0;
    while (t.nodes[node].kind == NodeKind::split) {
      const auto& nd = t.nodes[node];
      const auto child = static_cast<std::size_t>(x[nd.feature] <= nd.threshold ? nd.left : nd.right);
      d.contributions[nd.feature] += t.nodes[child].value - nd.value;
      node = child;
    }
  }
  const double j = static_cast<double>(f.trees.size());
  d.bias /= j;
  for (auto& c : d.contributions) c /= j;
  return d;
}

std::vector<double> feature_importance(const Forest& f) {
  std::vector<double> total(f.n_features, 0.0);
  std::size_t split_trees = 0;
  std::vector<double> imp(f.n_features);
  for (const auto& t : f.trees) {
    std::fill(imp.begin(), imp.end(), 0.0);
    const double n_root = static_cast<double>(t.root().n_samples);
    double sum = 0.0;
    for (const auto& nd : t.nodes) {
      if (nd.kind != NodeKind::split) continue;
      const auto& l = t.nodes[static_cast<std::size_t>(nd.left)];
      const auto& r = t.nodes[static_cast<std::size_t>(nd.right)];
      const double dec = (static_cast<double>(nd.n_samples) * nd.impurity -
                          static_cast<double>(l.n_samples) * l.impurity -
                          static_cast<double>(r.n_samples) * r.impurity) /
                         n_root;
      imp[nd.feature] += std::max(dec, 0.0);
    }
    for (double v : imp) sum += v;
    if (sum <= 0.0) continue;
    ++split_trees;
    for (std::size_t k = 0; k < imp.size(); ++k) total[k] += imp[k] / sum;
  }
  if (split_trees == 0) return total;
  for (auto& v : total) v /= static_cast<double>(split_trees);
  return total;
}

std::pair<Dataset, std::vector<std::string>> prune_by_importance(const Dataset& ds, const Forest& f,
                                                                 double threshold) {
  if (ds.cols() != f.n_features) throw ShapeError("prune_by_importance: model and dataset widths differ");
  const auto imp = feature_importance(f);
  std::vector<std::size_t> keep;
  std::vector<std::string> removed;
  for (std::size_t k = 0; k < imp.size(); ++k) {
    if (imp[k] >= threshold)
      keep.push_back(k);
    else
      removed.push_back(ds.meta[k].name);
  }
  if (keep.empty()) throw EmptyDatasetError("every indicator falls below the importance threshold");
  if (removed.empty()) return {ds, removed};
  return {select_columns(ds, keep), removed};
}

CVReport cross_validate(const Dataset& ds, const ForestConfig& cfg, std::size_t k, std::uint64_t seed,
                        std::size_t smote_k) {
  if (k < 2) throw ConfigError("cross_validate: k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < ds.rows(); ++r) by_class[ds.classes[r]].push_back(r);
  for (const auto& [c, rows] : by_class)
    if (rows.size() < k)
      throw StratificationError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                                " rows, fewer than " + std::to_string(k) + " folds");

  CVReport report;
  report.k = k;
  report.fold_assignments.assign(ds.rows(), 0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (auto& [c, rows] : by_class) {
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t i = 0; i < shuffled.size(); ++i) report.fold_assignments[shuffled[i]] = (offset + i) % k;
    offset += shuffled.size();
  }

  std::map<int, std::size_t> correct, actual;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < ds.rows(); ++r) (report.fold_assignments[r] == fold ? test : train).push_back(r);
    const auto balanced = smote(select_rows(ds, train), smote_k, derive_seed(seed, 1000 + fold));
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, fold);
    const auto model = fit_forest(balanced, fold_cfg);
    for (auto r : test) {
      const int truth = ds.classes[r];
      ++actual[truth];
      if (predict_class(model, ds.records.row(r)) == truth) ++correct[truth];
    }
  }
  double sum = 0.0;
  for (const auto& [c, n] : actual) {
    const double recall = static_cast<double>(correct[c]) / static_cast<double>(n);
    report.per_class_recall[c] = recall;
    sum += recall;
  }
  report.macro_recall = actual.empty() ? 0.0 : sum / static_cast<double>(actual.size());
  return report;
}

nlohmann::json CVReport::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["macro_recall"] = macro_recall;
  j["per_class_recall"] = nlohmann::json::object();
  for (const auto& [c, r] : per_class_recall) j["per_class_recall"][std::to_string(c)] = r;
  j["fold_assignments"] = fold_assignments;
  return j;
}

nlohmann::json forest_to_json(const Forest& f) {
  nlohmann::json j;
  j["format"] = "maasim-forest";
  j["version"] = kModelFormatVersion;
  j["n_features"] = f.n_features;
  j["class_range"] = {f.class_range.first, f.class_range.second};
  j["feature_names"] = f.feature_names;
  nlohmann::json cfg;
  cfg["n_trees"] = f.config.n_trees;
  cfg["max_features"] = f.config.max_features ? nlohmann::json(*f.config.max_features) : nlohmann::json();
  cfg["min_samples_leaf"] = f.config.min_samples_leaf;
  cfg["max_depth"] = f.config.max_depth ? nlohmann::json(*f.config.max_depth) : nlohmann::json();
  cfg["bootstrap"] = f.config.bootstrap;
  cfg["seed"] = f.config.seed;
  j["config"] = cfg;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& t : f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : t.nodes) {
      const bool split = nd.kind == NodeKind::split;
      nodes.push_back({{"kind", split ? "split" : "leaf"},
                       {"feature", split ? nlohmann::json(nd.feature) : nlohmann::json()},
                       {"threshold", split ? nlohmann::json(nd.threshold) : nlohmann::json()},
                       {"left", nd.left},
                       {"right", nd.right},
                       {"value", nd.value},
                       {"n_samples", nd.n_samples},
                       {"impurity", nd.impurity}});
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return j;
}

Forest forest_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "maasim-forest") throw FormatError("not a maasim forest model");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw VersionError("model format version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    Forest f;
    f.n_features = j.at("n_features").get<std::size_t>();
    const auto& cr = j.at("class_range");
    f.class_range = {cr.at(0).get<int>(), cr.at(1).get<int>()};
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& cfg = j.at("config");
    f.config.n_trees = cfg.at("n_trees").get<std::size_t>();
    if (!cfg.at("max_features").is_null()) f.config.max_features = cfg.at("max_features").get<std::size_t>();
    f.config.min_samples_leaf = cfg.at("min_samples_leaf").get<std::size_t>();
    if (!cfg.at("max_depth").is_null()) f.config.max_depth = cfg.at("max_depth").get<std::size_t>();
    f.config.bootstrap = cfg.at("bootstrap").get<bool>();
    f.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode nd;
        const auto kind = jn.at("kind").get<std::string>();
        if (kind != "split" && kind != "leaf") throw FormatError("unknown node kind '" + kind + "'");
        nd.kind = kind == "split" ? NodeKind::split : NodeKind::leaf;
        if (nd.kind == NodeKind::split) {
          nd.feature = jn.at("feature").get<std::size_t>();
          nd.threshold = jn.at("threshold").get<double>();
        }
        nd.left = jn.at("left").get<std::int32_t>();
        nd.right = jn.at("right").get<std::int32_t>();
        nd.value = jn.at("value").get<double>();
        nd.n_samples = jn.at("n_samples").get<std::size_t>();
        nd.impurity = jn.at("impurity").get<double>();
        t.nodes.push_back(nd);
      }
      const auto n = static_cast<std::int32_t>(t.nodes.size());
      if (n == 0) throw FormatError("model contains an empty tree");
      for (std::int32_t i = 0; i < n; ++i) {
        const auto& nd = t.nodes[static_cast<std::size_t>(i)];
        if (nd.kind == NodeKind::leaf) continue;
        if (nd.feature >= f.n_features || nd.left <= i || nd.right <= i || nd.left >= n || nd.right >= n)
          throw FormatError("model tree has an invalid split node");
      }
      f.trees.push_back(std::move(t));
    }
    if (f.trees.empty()) throw FormatError("model has no trees");
    if (!f.feature_names.empty() && f.feature_names.size() != f.n_features)
      throw FormatError("model feature_names length differs from n_features");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const Forest& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write model '" + path.string() + "'");
  out << forest_to_json(f).dump() << '\n';
}

Forest load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed model file '" + path.string() + "': " + e.what());
  }
  return forest_from_json(j);
}

}  // namespace maasim
