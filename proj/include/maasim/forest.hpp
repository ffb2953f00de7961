#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "maasim/dataset.hpp"

namespace maasim {

inline constexpr int kModelFormatVersion = 1;

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_features;  // ceil(sqrt(p)) when unset
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_depth;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

enum class NodeKind { split, leaf };

// Flat-array node; children are indices into Tree::nodes, -1 for leaves.
struct TreeNode {
  NodeKind kind = NodeKind::leaf;
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // mean target of the training rows reaching the node
  std::size_t n_samples = 0;
  double impurity = 0.0;  // variance of those targets

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& root() const { return nodes.front(); }
  std::size_t leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes[leaf_for(x)].value; }
  std::size_t depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Forest {
  std::vector<Tree> trees;
  ForestConfig config;
  std::size_t n_features = 0;
  std::pair<int, int> class_range{kMinClass, kMaxClass};
  std::vector<std::string> feature_names;

  friend bool operator==(const Forest&, const Forest&) = default;
};

// bias + sum(contributions) reproduces the forest prediction.
struct Decomposition {
  double bias = 0.0;
  std::vector<double> contributions;
};

struct CVReport {
  std::size_t k = 0;
  std::map<int, double> per_class_recall;
  double macro_recall = 0.0;
  std::vector<std::size_t> fold_assignments;  // row -> fold

  nlohmann::json to_json() const;
};

// Greedy CART regression tree with variance-reduction splits over a random
// subset of max_features features per node.
Tree fit_tree(const Matrix& x, std::span<const double> y, const ForestConfig& cfg, std::uint64_t seed);

// Trees are trained in parallel; per-tree seeds derive from cfg.seed so the
// result matches serial::fit_forest bit for bit.
Forest fit_forest(const Dataset& ds, const ForestConfig& cfg);

double predict(const Forest& f, std::span<const double> x);
int predict_class(const Forest& f, std::span<const double> x);
std::vector<double> predict_batch(const Forest& f, const Matrix& x);
Decomposition decompose(const Forest& f, std::span<const double> x);

// Mean decrease in impurity, per-tree normalised, averaged over trees.
std::vector<double> feature_importance(const Forest& f);

// Drops columns whose importance is below threshold. Returns removed names.
std::pair<Dataset, std::vector<std::string>> prune_by_importance(const Dataset& ds, const Forest& f,
                                                                 double threshold = 0.01);

// Stratified k-fold CV; SMOTE (smote_k neighbours) is applied to each
// training split only, recall computed with predict_class.
CVReport cross_validate(const Dataset& ds, const ForestConfig& cfg, std::size_t k, std::uint64_t seed,
                        std::size_t smote_k = 5);

nlohmann::json forest_to_json(const Forest& f);
Forest forest_from_json(const nlohmann::json& j);
void save_model(const Forest& f, const std::filesystem::path& path);
Forest load_model(const std::filesystem::path& path);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

namespace serial {
Forest fit_forest(const Dataset& ds, const ForestConfig& cfg);
std::vector<double> predict_batch(const Forest& f, const Matrix& x);
}  // namespace serial

}  // namespace maasim
