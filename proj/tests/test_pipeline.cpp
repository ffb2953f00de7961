#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "maasim/fixtures.hpp"
#include "maasim/pipeline.hpp"

using namespace maasim;

TEST_CASE("survey-shaped data is cleaned column by column") {
  const auto fx = fixtures::survey_like();
  const auto r = run_pipeline(fx.data, fixtures::survey_pipeline_config());

  CHECK(fx.data.cols() == 54);
  CHECK(r.report.removed_constant == fx.constant);
  CHECK(r.report.removed_constant.size() == 1);
  CHECK(r.report.removed_correlated.size() == 6);
  for (const auto& pair : fx.copies)
    CHECK(std::find(r.report.removed_correlated.begin(), r.report.removed_correlated.end(), pair) !=
          r.report.removed_correlated.end());
  CHECK(r.report.removed_classes == std::map<int, std::size_t>{{1, 3}});
  std::set<std::string> unimportant(r.report.removed_unimportant.begin(), r.report.removed_unimportant.end());
  CHECK(unimportant == std::set<std::string>(fx.noise.begin(), fx.noise.end()));
  CHECK(r.cleaned.cols() == 44);
  CHECK(r.cleaned.rows() == 994);
  CHECK(r.forest.n_features == 44);
  CHECK(r.forest.feature_names == r.cleaned.names());
  CHECK_FALSE(r.cv.has_value());
  CHECK(std::count(r.cleaned.classes.begin(), r.cleaned.classes.end(), 1) == 0);
}

TEST_CASE("pipeline config json") {
  const auto cfg = PipelineConfig::from_json(nlohmann::json::parse(R"({"smote_k": 3, "forest": {"n_trees": 7}})"));
  CHECK(cfg.smote_k == 3);
  CHECK(cfg.forest.n_trees == 7);
  CHECK(cfg.cv_folds == 10);
  const auto back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"smote": 3})")), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"forest": {"trees": 3}})")), ConfigError);

  const auto dir = test::temp_dir("pipecfg");
  std::ofstream(dir / "c.json") << R"({"seed": 5})";
  CHECK(load_pipeline_config(dir / "c.json").seed == 5);
}

TEST_CASE("pipeline outputs are byte-identical across runs") {
  auto cfg = PipelineConfig{};
  cfg.forest.n_trees = 20;
  cfg.cv_folds = 5;
  const auto ds = generate_synthetic(fixtures::planted_config(21));
  const auto a = test::temp_dir("pipe-a"), b = test::temp_dir("pipe-b");
  write_pipeline_outputs(run_pipeline(ds, cfg), a);
  write_pipeline_outputs(run_pipeline(ds, cfg), b);
  const std::vector<std::string> files{"model.json", "groups.json", "prune_report.txt", "prune_report.json",
                                       "cv_report.json"};
  for (const auto& f : files) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(test::read_file(a / f) == test::read_file(b / f));
  }
  const auto model = load_model(a / "model.json");
  CHECK(model.trees.size() == 20);
}

TEST_CASE("a dataset with nothing left fails loudly") {
  const auto ds = test::make_dataset({{1, 2}, {1, 2}, {1, 2}, {1, 2}}, {2, 2, 3, 3});
  CHECK_THROWS_AS(run_pipeline(ds, {}), EmptyDatasetError);
  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  for (int i = 0; i < 6; ++i) rows.push_back({double(i), double(i * i % 5)}), classes.push_back(1 + i % 3);
  CHECK_THROWS_AS(run_pipeline(test::make_dataset(rows, classes), {}), EmptyDatasetError);
}
