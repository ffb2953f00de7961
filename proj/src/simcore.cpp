#include "maasim/simcore.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace maasim {

namespace {

void add_target(std::span<double> current, std::span<const double> baseline, const ActionTarget& t) {
  current[t.indicator] = std::max(0.0, current[t.indicator] + t.delta_fraction * baseline[t.indicator]);
}

void apply_targets(std::span<double> current, std::span<const double> baseline, const ActionSpec& a) {
  for (const auto& t : a.targets) add_target(current, baseline, t);
}

}  // namespace

ActionCatalog::ActionCatalog(std::vector<ActionSpec> actions, std::size_t n_features) : actions_(std::move(actions)) {
  if (actions_.empty()) throw FormatError("catalog: no actions");
  std::set<std::string> ids;
  for (const auto& a : actions_) {
    if (a.id.empty()) throw FormatError("catalog: action with empty id");
    if (!ids.insert(a.id).second) throw FormatError("catalog: duplicate action id '" + a.id + "'");
    if (a.kind == ActionKind::direct && a.targets.size() != 1)
      throw FormatError("catalog: direct action '" + a.id + "' must have exactly one target");
    if (a.kind == ActionKind::indirect && a.targets.size() < 2)
      throw FormatError("catalog: indirect action '" + a.id + "' needs at least two targets");
    if (a.cost_turns == 0) throw FormatError("catalog: action '" + a.id + "' has zero cost");
    for (const auto& t : a.targets)
      if (t.indicator >= n_features)
        throw ReferenceError("catalog: action '" + a.id + "' targets indicator " + std::to_string(t.indicator) +
                             " outside the model");
  }
}

const ActionSpec* ActionCatalog::find(std::string_view id) const noexcept {
  for (const auto& a : actions_)
    if (a.id == id) return &a;
  return nullptr;
}

std::size_t ActionCatalog::n_direct() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(actions_.begin(), actions_.end(), [](const auto& a) { return a.kind == ActionKind::direct; }));
}

ActionCatalog parse_catalog(const nlohmann::json& j, std::span<const std::string> feature_names) {
  const nlohmann::json& arr = j.is_object() && j.contains("actions") ? j.at("actions") : j;
  if (!arr.is_array()) throw FormatError("catalog: expected an array of actions");
  std::vector<ActionSpec> actions;
  try {
    for (const auto& ja : arr) {
      ActionSpec a;
      a.id = ja.at("id").get<std::string>();
      a.name = ja.value("name", a.id);
      const auto kind = ja.at("kind").get<std::string>();
      if (kind == "direct")
        a.kind = ActionKind::direct;
      else if (kind == "indirect")
        a.kind = ActionKind::indirect;
      else
        throw FormatError("catalog: unknown action kind '" + kind + "'");
      for (const auto& jt : ja.at("targets")) {
        ActionTarget t;
        const auto& ind = jt.at("indicator");
        if (ind.is_string()) {
          const auto name = ind.get<std::string>();
          const auto it = std::find(feature_names.begin(), feature_names.end(), name);
          if (it == feature_names.end())
            throw ReferenceError("catalog: action '" + a.id + "' targets unknown indicator '" + name + "'");
          t.indicator = static_cast<std::size_t>(it - feature_names.begin());
        } else {
          t.indicator = ind.get<std::size_t>();
        }
        t.delta_fraction = jt.value("delta_fraction", 0.10);
        a.targets.push_back(t);
      }
      a.cost_turns = ja.value("cost_turns", std::size_t{1});
      actions.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("catalog: ") + e.what());
  }
  const std::size_t width = feature_names.empty() ? static_cast<std::size_t>(-1) : feature_names.size();
  return ActionCatalog(std::move(actions), width);
}

ActionCatalog load_catalog(const std::filesystem::path& path, std::span<const std::string> feature_names) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open catalog '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed catalog '" + path.string() + "': " + e.what());
  }
  return parse_catalog(j, feature_names);
}

nlohmann::json catalog_to_json(const ActionCatalog& c, std::span<const std::string> feature_names) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : c.actions()) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : a.targets) {
      const nlohmann::json ind =
          t.indicator < feature_names.size() ? nlohmann::json(feature_names[t.indicator]) : nlohmann::json(t.indicator);
      targets.push_back({{"indicator", ind}, {"delta_fraction", t.delta_fraction}});
    }
    arr.push_back({{"id", a.id},
                   {"name", a.name},
                   {"kind", a.kind == ActionKind::direct ? "direct" : "indirect"},
                   {"targets", std::move(targets)},
                   {"cost_turns", a.cost_turns}});
  }
  return arr;
}

SessionState start_session(std::string neighbourhood_id, std::vector<double> baseline, const Forest& f) {
  SessionState s;
  s.neighbourhood_id = std::move(neighbourhood_id);
  s.current = baseline;
  s.baseline = std::move(baseline);
  s.score = predict(f, s.current);
  return s;
}

SessionState apply_action(SessionState s, const ActionSpec& a, const Forest& f) {
  s.snapshots.push_back(s.current);
  apply_targets(s.current, s.baseline, a);
  s.turns += a.cost_turns;
  s.step_costs.push_back(a.cost_turns);
  s.history.push_back(a.id);
  s.score = predict(f, s.current);
  return s;
}

SessionState apply_plan(SessionState s, const Genome& genome, const ActionCatalog& catalog, const Forest& f) {
  if (genome.size() != catalog.size())
    throw ShapeError("genome length " + std::to_string(genome.size()) + " differs from catalog size " +
                     std::to_string(catalog.size()));
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!genome[i]) continue;
    s.snapshots.push_back(s.current);
    apply_targets(s.current, s.baseline, catalog[i]);
    s.turns += catalog[i].cost_turns;
    s.step_costs.push_back(catalog[i].cost_turns);
    s.history.push_back(catalog[i].id);
  }
  s.score = predict(f, s.current);
  return s;
}

double evaluate(const SessionState& s, const Forest& f) { return predict(f, s.current); }

SessionState undo(SessionState s, const Forest& f) {
  if (s.history.empty()) throw NothingToUndoError("nothing to undo");
  s.current = std::move(s.snapshots.back());
  s.snapshots.pop_back();
  s.turns -= s.step_costs.back();
  s.step_costs.pop_back();
  s.history.pop_back();
  s.score = predict(f, s.current);
  return s;
}

std::vector<double> plan_indicators(std::span<const double> baseline, std::span<const double> current,
                                    const Genome& genome, const ActionCatalog& catalog) {
  if (genome.size() != catalog.size()) throw ShapeError("genome length differs from catalog size");
  std::vector<double> out(current.begin(), current.end());
  for (std::size_t i = 0; i < catalog.size(); ++i)
    if (genome[i]) apply_targets(out, baseline, catalog[i]);
  return out;
}

nlohmann::json session_to_json(const SessionState& s) {
  return {{"neighbourhood_id", s.neighbourhood_id},
          {"baseline", s.baseline},
          {"current", s.current},
          {"turns", s.turns},
          {"history", s.history},
          {"snapshots", s.snapshots},
          {"step_costs", s.step_costs},
          {"score", s.score}};
}

SessionState session_from_json(const nlohmann::json& j) {
  try {
    SessionState s;
    s.neighbourhood_id = j.at("neighbourhood_id").get<std::string>();
    s.baseline = j.at("baseline").get<std::vector<double>>();
    s.current = j.at("current").get<std::vector<double>>();
    s.turns = j.at("turns").get<std::size_t>();
    s.history = j.at("history").get<std::vector<std::string>>();
    s.snapshots = j.at("snapshots").get<std::vector<std::vector<double>>>();
    s.step_costs = j.at("step_costs").get<std::vector<std::size_t>>();
    s.score = j.at("score").get<double>();
    if (s.snapshots.size() != s.history.size() || s.step_costs.size() != s.history.size() || s.baseline.size() != s.current.size())
      throw FormatError("session snapshot is inconsistent");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed session: ") + e.what());
  }
}

}  // namespace maasim
