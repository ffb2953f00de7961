#include "maasim/pipeline.hpp"

#include <fstream>
#include <set>

namespace maasim {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

ForestConfig forest_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"n_trees", "max_features", "min_samples_leaf", "max_depth", "bootstrap", "seed"}, "forest");
  ForestConfig c;
  c.n_trees = j.value("n_trees", c.n_trees);
  if (j.contains("max_features") && !j.at("max_features").is_null())
    c.max_features = j.at("max_features").get<std::size_t>();
  c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<std::size_t>();
  c.bootstrap = j.value("bootstrap", c.bootstrap);
  c.seed = j.value("seed", c.seed);
  if (c.n_trees == 0) throw ConfigError("forest: n_trees must be positive");
  if (c.min_samples_leaf == 0) throw ConfigError("forest: min_samples_leaf must be positive");
  return c;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  try {
    reject_unknown(j,
                   {"forest", "smote_k", "min_class_count", "correlation_tol", "importance_threshold", "cv_folds", "seed"},
                   "pipeline config");
    PipelineConfig c;
    if (j.contains("forest")) c.forest = forest_config_from_json(j.at("forest"));
    c.smote_k = j.value("smote_k", c.smote_k);
    c.min_class_count = j.value("min_class_count", c.min_class_count);
    c.correlation_tol = j.value("correlation_tol", c.correlation_tol);
    c.importance_threshold = j.value("importance_threshold", c.importance_threshold);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    c.seed = j.value("seed", c.seed);
    if (!j.contains("forest") || !j.at("forest").contains("seed")) c.forest.seed = c.seed;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json f = {{"n_trees", forest.n_trees},
                      {"max_features", forest.max_features ? nlohmann::json(*forest.max_features) : nlohmann::json()},
                      {"min_samples_leaf", forest.min_samples_leaf},
                      {"max_depth", forest.max_depth ? nlohmann::json(*forest.max_depth) : nlohmann::json()},
                      {"bootstrap", forest.bootstrap},
                      {"seed", forest.seed}};
  return {{"forest", std::move(f)},
          {"smote_k", smote_k},
          {"min_class_count", min_class_count},
          {"correlation_tol", correlation_tol},
          {"importance_threshold", importance_threshold},
          {"cv_folds", cv_folds},
          {"seed", seed}};
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config '" + path.string() + "': " + e.what());
  }
  return PipelineConfig::from_json(j);
}

PipelineResult run_pipeline(const Dataset& raw, const PipelineConfig& cfg) {
  raw.validate();
  PipelineResult r;

  auto [no_const, rep_const] = drop_constant(raw);
  auto [no_corr, rep_corr] = drop_perfect_correlation(no_const, cfg.correlation_tol);
  auto [cleaned, rep_rare] = filter_rare_classes(no_corr, cfg.min_class_count);
  r.report.merge(rep_const);
  r.report.merge(rep_corr);
  r.report.merge(rep_rare);

  const Dataset balanced = smote(cleaned, cfg.smote_k, derive_seed(cfg.seed, 1));
  const Forest first = fit_forest(balanced, cfg.forest);
  r.importance = feature_importance(first);
  auto [balanced_pruned, removed] = prune_by_importance(balanced, first, cfg.importance_threshold);
  r.report.removed_unimportant = removed;

  if (removed.empty()) {
    r.forest = first;
    r.cleaned = std::move(cleaned);
  } else {
    r.forest = fit_forest(balanced_pruned, cfg.forest);
    r.cleaned = project_columns(cleaned, balanced_pruned.names());
  }

  if (cfg.cv_folds > 0) r.cv = cross_validate(r.cleaned, cfg.forest, cfg.cv_folds, derive_seed(cfg.seed, 2), cfg.smote_k);
  r.groups = group_weights(r.forest, r.cleaned);
  return r;
}

void write_pipeline_outputs(const PipelineResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_model(r.forest, dir / "model.json");
  write_text(dir / "groups.json", r.groups.to_json().dump(2) + "\n");
  write_text(dir / "prune_report.txt", r.report.to_text());
  write_text(dir / "prune_report.json", r.report.to_json().dump(2) + "\n");
  if (r.cv) write_text(dir / "cv_report.json", r.cv->to_json().dump(2) + "\n");
}

}  // namespace maasim
