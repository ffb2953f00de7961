#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maasim/matrix.hpp"

namespace maasim {

inline constexpr int kMinClass = 1;
inline constexpr int kMaxClass = 6;

enum class Group { housing, environment, services, healthcare, leisure, none };

inline constexpr Group kDisplayGroups[] = {Group::housing, Group::environment, Group::services,
                                           Group::healthcare, Group::leisure};

std::string_view to_string(Group g) noexcept;
// Throws FormatError for unknown names.
Group group_from_string(std::string_view name);
// Group implied by an indicator name of the form "<group>_...", or none.
Group group_from_indicator_name(std::string_view name) noexcept;

struct IndicatorMeta {
  std::size_t index = 0;
  std::string name;
  Group group = Group::none;
  std::string unit;

  friend bool operator==(const IndicatorMeta&, const IndicatorMeta&) = default;
};

// Neighbourhood indicators with ordinal liveability classes.
// Invariants: rows(records) == classes.size() == ids.size(); cols(records) ==
// meta.size(); every class in [1, 6]; every value finite.
struct Dataset {
  Matrix records;
  std::vector<int> classes;
  std::vector<IndicatorMeta> meta;
  std::vector<std::string> ids;

  std::size_t rows() const noexcept { return records.rows(); }
  std::size_t cols() const noexcept { return meta.size(); }

  std::vector<std::string> names() const;
  std::optional<std::size_t> column_index(std::string_view name) const;
  std::optional<std::size_t> row_index(std::string_view id) const;
  std::vector<double> targets() const;  // class labels as regression targets

  // Throws on any invariant violation.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

// Counts over every class in [1, 6]; absent classes map to 0.
std::map<int, std::size_t> class_histogram(const Dataset& ds);

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows);
// Keeps the given columns in order and renumbers meta indices.
Dataset select_columns(const Dataset& ds, std::span<const std::size_t> cols);
// Columns looked up by name; unknown names throw ReferenceError.
Dataset project_columns(const Dataset& ds, std::span<const std::string> names);

enum class CutMode {
  absolute,  // thresholds on the standardised hidden score
  quantile,  // fractions of rows (by hidden-score rank) below each cut
};

struct SyntheticConfig {
  std::size_t n_rows = 1000;
  std::size_t n_latent = 3;
  std::size_t n_indicators = 20;
  // Trailing indicators that carry neither latent signal nor score weight.
  std::size_t n_noise = 0;
  double noise_sd = 0.5;
  std::vector<double> class_cuts{-0.84, -0.25, 0.25, 0.84};
  CutMode cut_mode = CutMode::absolute;
  int first_class = 1;
  double offset = 0.0;  // added to every indicator
  // n_indicators x n_latent; drawn from the seed when absent.
  std::optional<Matrix> loadings;
  // Hidden-score weight per indicator; U(0.5, 1.5) for signal indicators when absent.
  std::optional<std::vector<double>> score_weights;
  // Indicator names; "<group>_NN" round-robin over the five groups when empty.
  std::vector<std::string> names;
  std::uint64_t seed = 0;
};

struct SyntheticTruth {
  Matrix loadings;
  std::vector<double> score_weights;  // zero for noise indicators
  double score_scale = 1.0;
  std::vector<double> hidden;  // per row, standardised
  std::vector<double> thresholds;  // hidden-score cut points actually applied

  // Standardised hidden score of an indicator vector.
  double hidden_score(std::span<const double> x, double offset) const;
};

struct SyntheticData {
  Dataset data;
  SyntheticTruth truth;
};

// indicators = offset + latent x loadings^T + N(0, noise_sd); class index
// from the cut interval holding the hidden score. Deterministic per seed.
SyntheticData generate_synthetic_with_truth(const SyntheticConfig& cfg);
Dataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace maasim
