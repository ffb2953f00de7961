#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maasim/dataset.hpp"
#include "maasim/forest.hpp"

namespace test {

// Small dataset built from literal rows; names default to f0, f1, ...
inline maasim::Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& classes,
                                    std::vector<std::string> names = {}) {
  maasim::Dataset ds;
  const std::size_t cols = rows.empty() ? names.size() : rows.front().size();
  if (names.empty())
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  ds.records = maasim::Matrix(0, cols);
  for (const auto& r : rows) ds.records.append_row(r);
  ds.classes = classes;
  for (std::size_t i = 0; i < rows.size(); ++i) ds.ids.push_back("r" + std::to_string(i));
  for (std::size_t c = 0; c < cols; ++c)
    ds.meta.push_back({c, names[c], maasim::group_from_indicator_name(names[c]), ""});
  ds.validate();
  return ds;
}

// Leaf-only tree predicting v.
inline maasim::Tree leaf_tree(double v) {
  maasim::Tree t;
  t.nodes.push_back({maasim::NodeKind::leaf, 0, 0.0, -1, -1, v, 1, 0.0});
  return t;
}

// Depth-1 tree: x[feature] <= threshold -> left, else right.
inline maasim::Tree stump(std::size_t feature, double threshold, double root, double left, double right,
                          std::size_t n_left = 1, std::size_t n_right = 1, double impurity = 1.0) {
  maasim::Tree t;
  t.nodes.push_back({maasim::NodeKind::split, feature, threshold, 1, 2, root, n_left + n_right, impurity});
  t.nodes.push_back({maasim::NodeKind::leaf, 0, 0.0, -1, -1, left, n_left, 0.0});
  t.nodes.push_back({maasim::NodeKind::leaf, 0, 0.0, -1, -1, right, n_right, 0.0});
  return t;
}

inline maasim::Forest forest_of(std::vector<maasim::Tree> trees, std::size_t n_features) {
  maasim::Forest f;
  f.trees = std::move(trees);
  f.n_features = n_features;
  for (std::size_t k = 0; k < n_features; ++k) f.feature_names.push_back("f" + std::to_string(k));
  f.config.n_trees = f.trees.size();
  return f;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("maasim-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test
