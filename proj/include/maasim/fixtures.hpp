#pragma once

// Reproducible inputs shared by the CLI demo, the tests and the benchmarks.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "maasim/dataset.hpp"
#include "maasim/forest.hpp"
#include "maasim/pipeline.hpp"
#include "maasim/simcore.hpp"

namespace maasim::fixtures {

// The twenty indicator names the shipped catalog refers to, interleaved
// round-robin over the five display groups.
const std::vector<std::string>& demo_indicator_names();

// Contents of data/catalog.default.json: 11 direct actions and 1 indirect.
const nlohmann::json& default_catalog_json();

// Planted data: 1000 rows, 5 imbalanced classes, demo indicator names.
SyntheticConfig planted_config(std::uint64_t seed = 7);

// Demo neighbourhoods for the game: one factor per display group plus a
// strong indicator-specific part, so every indicator keeps its importance and
// the shipped catalog resolves against the trained model.
SyntheticConfig demo_config(std::uint64_t seed = 3);

// 997 rows x 54 columns shaped like the original survey: one constant column,
// six affine copies, three trailing noise columns and exactly three rows of
// class 1.
struct SurveyLike {
  Dataset data;
  std::vector<std::string> constant;  // names
  std::vector<std::pair<std::string, std::string>> copies;  // (source, copy)
  std::vector<std::string> noise;
};
SurveyLike survey_like(std::uint64_t seed = 11);
// Settings under which exactly the three noise columns fall below 0.01.
PipelineConfig survey_pipeline_config();

// A forest, catalog and neighbourhood ready to play.
struct Game {
  Forest forest;
  ActionCatalog catalog;
  Dataset dataset;  // contains the neighbourhood row
  std::string neighbourhood;

  SessionState session() const;
};

// Two actions on two stumps: base 3.0, A -> 3.5, B -> 3.1, A+B -> 3.6.
Game toy_game();

// Hand-built forest over the demo indicators driven by the default catalog.
// Effects are additive: two actions add 0.3, eight add 0.12, two do nothing,
// so many plans tie and the exact front has 258 genomes over 10 objective
// vectors.
Game plateau_game();

}  // namespace maasim::fixtures
