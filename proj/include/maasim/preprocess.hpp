#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "maasim/dataset.hpp"

namespace maasim {

struct PruneReport {
  std::vector<std::string> removed_constant;
  std::vector<std::pair<std::string, std::string>> removed_correlated;  // (kept, dropped)
  std::map<int, std::size_t> removed_classes;                            // class -> row count
  std::vector<std::string> removed_unimportant;

  bool empty() const noexcept {
    return removed_constant.empty() && removed_correlated.empty() && removed_classes.empty() &&
           removed_unimportant.empty();
  }
  void merge(const PruneReport& other);
  std::string to_text() const;
  nlohmann::json to_json() const;
};

struct CorrelationMatrix {
  Matrix values;  // Pearson r, symmetric, unit diagonal
  std::vector<std::string> names;

  std::size_t size() const noexcept { return names.size(); }
};

std::pair<Dataset, PruneReport> drop_constant(const Dataset& ds);

// Throws DegenerateColumnError when a column has zero variance.
CorrelationMatrix correlation_matrix(const Dataset& ds);
CorrelationMatrix correlation_matrix(const Matrix& records, std::vector<std::string> names);

// Repeatedly drops the later column of any pair with |r| >= 1 - tol.
std::pair<Dataset, PruneReport> drop_perfect_correlation(const Dataset& ds, double tol = 1e-9);

std::pair<Dataset, PruneReport> filter_rare_classes(const Dataset& ds, std::size_t min_count = 4);

struct SmoteOrigin {
  std::size_t row;        // index (in the output) of the synthetic row
  std::size_t base;       // original minority row
  std::size_t neighbour;  // chosen same-class neighbour
  double gap;             // interpolation factor in [0, 1]
};

struct SmoteResult {
  Dataset data;  // originals first, verbatim, then synthetic rows by class
  std::vector<SmoteOrigin> origins;
};

// Oversamples every class up to the majority count by interpolating towards
// one of the k nearest same-class neighbours. Deterministic for a seed.
SmoteResult smote_detailed(const Dataset& ds, std::size_t k, std::uint64_t seed);
Dataset smote(const Dataset& ds, std::size_t k, std::uint64_t seed);

// k nearest rows (Euclidean, ties by index) among `members` for every member.
// Data-parallel over members; serial::nearest_neighbours is the reference.
std::vector<std::vector<std::size_t>> nearest_neighbours(const Matrix& x, const std::vector<std::size_t>& members,
                                                         std::size_t k);

namespace serial {
std::vector<std::vector<std::size_t>> nearest_neighbours(const Matrix& x, const std::vector<std::size_t>& members,
                                                         std::size_t k);
CorrelationMatrix correlation_matrix(const Matrix& records, std::vector<std::string> names);
}  // namespace serial

}  // namespace maasim
