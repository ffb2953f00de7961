#pragma once

#include <cstddef>

#include "maasim/forest.hpp"

namespace maasim::detail {

// Config with max_features resolved and validated against the data width.
ForestConfig resolve_config(const ForestConfig& cfg, std::size_t n_features);

// Tree `index` of a forest: bootstrap resample (if enabled) plus CART fit,
// seeded from derive_seed(cfg.seed, index).
Tree fit_forest_tree(const Matrix& x, std::span<const double> y, const ForestConfig& resolved, std::size_t index);

Forest make_forest_shell(const Dataset& ds, const ForestConfig& resolved);

}  // namespace maasim::detail
