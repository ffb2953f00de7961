#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "maasim/dataset.hpp"
#include "maasim/forest.hpp"
#include "maasim/preprocess.hpp"

namespace maasim {

struct KmoResult {
  double value = 0.0;
  bool ridge_applied = false;  // 1e-8 * I added before inversion
};

// Kaiser-Meyer-Olkin sampling adequacy from correlations and anti-image
// partial correlations. Throws UndefinedError when every off-diagonal r is 0.
KmoResult kmo(const CorrelationMatrix& c);

// Principal-component communalities: row sums of squared loadings over the
// n_factors largest eigenpairs. Degenerate eigenspaces get a canonical basis
// built from the unit vectors in index order.
std::vector<double> communalities(const CorrelationMatrix& c, std::size_t n_factors);

struct GroupWeights {
  struct Entry {
    std::size_t indicator = 0;
    std::string name;
    double weight = 0.0;
  };
  std::map<Group, std::vector<Entry>> groups;
  std::vector<Group> uniform_fallback;  // groups whose contributions were all zero

  nlohmann::json to_json() const;
  static GroupWeights from_json(const nlohmann::json& j, std::span<const std::string> feature_names);
};

// Weight of indicator k = mean |contrib(x, k)| over dataset rows, normalised
// within its group.
GroupWeights group_weights(const Forest& f, const Dataset& ds, const std::map<std::size_t, Group>& groups);
GroupWeights group_weights(const Forest& f, const Dataset& ds);  // groups from ds.meta

// Baseline-relative display score per group: sum of weight_k * x_k / baseline_k.
std::map<Group, double> group_scores(std::span<const double> x, const GroupWeights& gw,
                                     std::span<const double> baselines);

}  // namespace maasim
