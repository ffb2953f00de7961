#include "maasim/fixtures.hpp"

#include <algorithm>
#include <set>

namespace maasim::fixtures {

namespace {

Tree stump(std::size_t feature, double threshold, double left, double right) {
  Tree t;
  const double mid = (left + right) / 2.0;
  const double var = (left - mid) * (left - mid);
  t.nodes.push_back({NodeKind::split, feature, threshold, 1, 2, mid, 2, var});
  t.nodes.push_back({NodeKind::leaf, 0, 0.0, -1, -1, left, 1, 0.0});
  t.nodes.push_back({NodeKind::leaf, 0, 0.0, -1, -1, right, 1, 0.0});
  return t;
}

Forest shell_forest(std::vector<std::string> names) {
  Forest f;
  f.n_features = names.size();
  f.feature_names = std::move(names);
  f.class_range = {kMinClass, kMaxClass};
  return f;
}

Dataset single_table(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
                     const std::vector<std::string>& ids, const std::vector<int>& classes) {
  Dataset ds;
  ds.records = Matrix(0, names.size());
  for (const auto& r : rows) ds.records.append_row(r);
  ds.ids = ids;
  ds.classes = classes;
  for (std::size_t k = 0; k < names.size(); ++k) ds.meta.push_back({k, names[k], group_from_indicator_name(names[k]), ""});
  ds.validate();
  return ds;
}

}  // namespace

const std::vector<std::string>& demo_indicator_names() {
  static const std::vector<std::string> names = {
      "housing_owner_occupied_pct",      "environment_green_area_pct",  "services_grocery_density",
      "healthcare_gp_density",           "leisure_park_density",        "housing_dwelling_value",
      "environment_water_area_pct",      "services_school_density",     "healthcare_pharmacy_density",
      "leisure_library_density",         "housing_new_builds_pct",      "environment_trees_density",
      "services_public_transport_stops", "healthcare_hospital_access",  "leisure_swimming_pools",
      "housing_family_households_pct",   "environment_quiet_area_pct",  "services_childcare_density",
      "healthcare_dentist_density",      "leisure_restaurants_density",
  };
  return names;
}

const nlohmann::json& default_catalog_json() {
  static const nlohmann::json catalog = [] {
    auto direct = [](const char* id, const char* name, const char* indicator) {
      return nlohmann::json{{"id", id},
                            {"name", name},
                            {"kind", "direct"},
                            {"targets", {{{"indicator", indicator}, {"delta_fraction", 0.10}}}},
                            {"cost_turns", 1}};
    };
    nlohmann::json a = nlohmann::json::array();
    a.push_back(direct("add_grocery", "Open a grocery store", "services_grocery_density"));
    a.push_back(direct("add_school", "Build a school", "services_school_density"));
    a.push_back(direct("add_bus_stops", "Add bus stops", "services_public_transport_stops"));
    a.push_back(direct("add_gp", "Open a GP practice", "healthcare_gp_density"));
    a.push_back(direct("add_pharmacy", "Open a pharmacy", "healthcare_pharmacy_density"));
    a.push_back(direct("add_park", "Lay out a park", "leisure_park_density"));
    a.push_back(direct("add_library", "Open a library", "leisure_library_density"));
    a.push_back(direct("add_pool", "Build a swimming pool", "leisure_swimming_pools"));
    a.push_back(direct("plant_trees", "Plant trees", "environment_trees_density"));
    a.push_back(direct("add_green", "Create green space", "environment_green_area_pct"));
    a.push_back(direct("new_builds", "Build new homes", "housing_new_builds_pct"));
    // Shares of the family factor's loadings on its three strongest indicators.
    a.push_back({{"id", "attract_families"},
                 {"name", "Attract young families"},
                 {"kind", "indirect"},
                 {"targets",
                  {{{"indicator", "housing_family_households_pct"}, {"delta_fraction", 0.10}},
                   {{"indicator", "services_childcare_density"}, {"delta_fraction", 0.05}},
                   {{"indicator", "housing_owner_occupied_pct"}, {"delta_fraction", 0.05}}}},
                 {"cost_turns", 1}});
    return a;
  }();
  return catalog;
}

SyntheticConfig planted_config(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n_rows = 1000;
  cfg.n_latent = 1;
  cfg.n_indicators = 20;
  cfg.noise_sd = 0.1;
  cfg.cut_mode = CutMode::quantile;
  cfg.class_cuts = {0.08, 0.3, 0.7, 0.9};
  cfg.first_class = 1;
  cfg.offset = 10.0;
  cfg.names = demo_indicator_names();
  cfg.seed = seed;
  return cfg;
}

SyntheticConfig demo_config(std::uint64_t seed) {
  SyntheticConfig cfg = planted_config(seed);
  cfg.n_latent = std::size(kDisplayGroups);
  cfg.noise_sd = 0.7;
  cfg.loadings = Matrix(cfg.n_indicators, cfg.n_latent);
  for (std::size_t k = 0; k < cfg.n_indicators; ++k) (*cfg.loadings)(k, k % cfg.n_latent) = 0.7;
  cfg.score_weights = std::vector<double>(cfg.n_indicators, 1.0);
  return cfg;
}

SurveyLike survey_like(std::uint64_t seed) {
  // Every signal indicator carries its own factor with equal weight in the
  // hidden score, so importance spreads evenly and only the noise falls away.
  constexpr std::size_t n_signal = 44;
  SyntheticConfig cfg;
  cfg.n_rows = 997;
  cfg.n_latent = n_signal;
  cfg.n_indicators = n_signal + 3;
  cfg.n_noise = 3;
  cfg.noise_sd = 0.3;
  cfg.loadings = Matrix(cfg.n_indicators, n_signal);
  for (std::size_t k = 0; k < n_signal; ++k) (*cfg.loadings)(k, k) = 1.0;
  cfg.score_weights = std::vector<double>(cfg.n_indicators, 0.0);
  for (std::size_t k = 0; k < n_signal; ++k) (*cfg.score_weights)[k] = 1.0;
  cfg.cut_mode = CutMode::quantile;
  cfg.class_cuts = {3.0 / 997.0, 0.12, 0.4, 0.7, 0.9};
  cfg.offset = 10.0;
  cfg.seed = seed;
  const Dataset base = generate_synthetic(cfg);

  struct Column {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Column> cols;
  SurveyLike out;
  const std::set<std::size_t> copy_after = {10, 17, 24, 31, 38, 43};
  for (std::size_t k = 0; k < n_signal; ++k) {
    cols.push_back({base.meta[k].name, base.records.column(k)});
    if (k == 6) {
      cols.push_back({"housing_constant", std::vector<double>(base.rows(), 1.0)});
      out.constant.push_back("housing_constant");
    }
    if (copy_after.contains(k)) {
      const std::size_t src = k - 3;
      const double scale = k % 2 == 0 ? 2.5 : -1.5;
      Column c{base.meta[src].name + "_copy", base.records.column(src)};
      for (auto& v : c.values) v = scale * v + 4.0;
      out.copies.push_back({base.meta[src].name, c.name});
      cols.push_back(std::move(c));
    }
  }
  for (std::size_t k = n_signal; k < cfg.n_indicators; ++k) {
    cols.push_back({"noise_" + std::to_string(k - n_signal + 1), base.records.column(k)});
    out.noise.push_back(cols.back().name);
  }

  Dataset& ds = out.data;
  ds.records = Matrix(base.rows(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < base.rows(); ++r) ds.records(r, c) = cols[c].values[r];
    ds.meta.push_back({c, cols[c].name, group_from_indicator_name(cols[c].name), ""});
  }
  ds.classes = base.classes;
  ds.ids = base.ids;
  ds.validate();
  return out;
}

PipelineConfig survey_pipeline_config() {
  PipelineConfig cfg;
  cfg.forest.min_samples_leaf = 10;
  cfg.cv_folds = 0;
  return cfg;
}

SessionState Game::session() const {
  const auto row = dataset.row_index(neighbourhood);
  if (!row) throw ReferenceError("unknown neighbourhood '" + neighbourhood + "'");
  const auto names = forest.feature_names;
  const Dataset projected = project_columns(dataset, names);
  const auto x = projected.records.row(*row);
  return start_session(neighbourhood, std::vector<double>(x.begin(), x.end()), forest);
}

Game toy_game() {
  Game g;
  const std::vector<std::string> names = {"services_shops", "leisure_parks"};
  g.forest = shell_forest(names);
  g.forest.config.n_trees = 2;
  g.forest.trees = {stump(0, 10.5, 3.0, 4.0), stump(1, 10.5, 3.0, 3.2)};
  g.catalog = ActionCatalog(
      {{"A", "Open shops", ActionKind::direct, {{0, 0.10}}, 1}, {"B", "Open a park", ActionKind::direct, {{1, 0.10}}, 1}},
      names.size());
  g.dataset = single_table(names, {{10.0, 10.0}, {12.0, 12.0}}, {"toy", "toy-high"}, {3, 4});
  g.neighbourhood = "toy";
  return g;
}

Game plateau_game() {
  Game g;
  const auto& names = demo_indicator_names();
  g.forest = shell_forest(names);
  g.catalog = parse_catalog(default_catalog_json(), names);

  auto baseline = [](std::size_t k) { return 10.0 + static_cast<double>(k); };
  auto index = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  const std::vector<std::pair<std::string, double>> effects = {
      {"services_grocery_density", 0.30},       {"healthcare_gp_density", 0.30},
      {"services_school_density", 0.12},        {"services_public_transport_stops", 0.12},
      {"healthcare_pharmacy_density", 0.12},    {"leisure_park_density", 0.12},
      {"leisure_library_density", 0.12},        {"environment_trees_density", 0.12},
      {"environment_green_area_pct", 0.12},     {"housing_family_households_pct", 0.12},
  };
  const double n_trees = static_cast<double>(effects.size());
  for (const auto& [name, inc] : effects) {
    const std::size_t k = index(name);
    // A +10% step crosses the split, the indirect action's +5% side effects do not.
    g.forest.trees.push_back(stump(k, baseline(k) * 1.07, 2.0, 2.0 + n_trees * inc));
  }
  g.forest.config.n_trees = g.forest.trees.size();

  std::vector<double> low(names.size()), high(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    low[k] = baseline(k);
    high[k] = baseline(k) * 1.2;
  }
  g.dataset = single_table(names, {low, high}, {"fixture-low", "fixture-high"}, {2, 4});
  g.neighbourhood = "fixture-low";
  return g;
}

}  // namespace maasim::fixtures
