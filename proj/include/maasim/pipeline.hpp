#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "maasim/analysis.hpp"
#include "maasim/dataset.hpp"
#include "maasim/forest.hpp"
#include "maasim/preprocess.hpp"

namespace maasim {

struct PipelineConfig {
  ForestConfig forest;
  std::size_t smote_k = 5;
  std::size_t min_class_count = 4;
  double correlation_tol = 1e-9;
  double importance_threshold = 0.01;
  std::size_t cv_folds = 10;  // 0 skips cross-validation
  std::uint64_t seed = 42;

  // Unknown keys throw ConfigError; missing keys keep their defaults.
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
  Dataset cleaned;  // after every column and row filter, before SMOTE
  Forest forest;    // refit on the balanced, pruned data
  PruneReport report;
  std::optional<CVReport> cv;
  GroupWeights groups;
  std::vector<double> importance;  // of the forest that drove the pruning
};

// constant columns -> |r| = 1 columns -> rare classes -> SMOTE -> fit ->
// importance pruning -> refit -> CV on the cleaned rows -> group weights.
PipelineResult run_pipeline(const Dataset& raw, const PipelineConfig& cfg);

// Writes model.json, groups.json, prune_report.txt, prune_report.json and,
// when CV ran, cv_report.json.
void write_pipeline_outputs(const PipelineResult& r, const std::filesystem::path& dir);

}  // namespace maasim
