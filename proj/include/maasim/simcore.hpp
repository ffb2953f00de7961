#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "maasim/forest.hpp"
#include "maasim/genome.hpp"

namespace maasim {

enum class ActionKind { direct, indirect };

struct ActionTarget {
  std::size_t indicator = 0;
  double delta_fraction = 0.10;  // of the indicator's baseline value

  friend bool operator==(const ActionTarget&, const ActionTarget&) = default;
};

// Direct actions move one indicator, indirect actions several.
struct ActionSpec {
  std::string id;
  std::string name;
  ActionKind kind = ActionKind::direct;
  std::vector<ActionTarget> targets;
  std::size_t cost_turns = 1;

  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

class ActionCatalog {
 public:
  ActionCatalog() = default;
  // Validates ids, target counts and indicator range (n_features).
  ActionCatalog(std::vector<ActionSpec> actions, std::size_t n_features);

  const std::vector<ActionSpec>& actions() const noexcept { return actions_; }
  std::size_t size() const noexcept { return actions_.size(); }
  const ActionSpec& operator[](std::size_t i) const { return actions_.at(i); }
  const ActionSpec* find(std::string_view id) const noexcept;
  std::size_t n_direct() const noexcept;

 private:
  std::vector<ActionSpec> actions_;
};

// Catalog JSON: array of {id, name, kind, targets: [{indicator, delta_fraction}],
// cost_turns}. Indicators are names resolved against feature_names (or
// integer indices).
ActionCatalog parse_catalog(const nlohmann::json& j, std::span<const std::string> feature_names);
ActionCatalog load_catalog(const std::filesystem::path& path, std::span<const std::string> feature_names);
nlohmann::json catalog_to_json(const ActionCatalog& c, std::span<const std::string> feature_names);

// One neighbourhood being played. baseline is frozen at session start; deltas
// are fractions of it, so repeated actions add equal absolute increments.
struct SessionState {
  std::string neighbourhood_id;
  std::vector<double> baseline;
  std::vector<double> current;
  std::size_t turns = 0;
  std::vector<std::string> history;
  // current before each history entry, for exact undo through the zero floor
  std::vector<std::vector<double>> snapshots;
  std::vector<std::size_t> step_costs;
  double score = 0.0;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

SessionState start_session(std::string neighbourhood_id, std::vector<double> baseline, const Forest& f);

SessionState apply_action(SessionState s, const ActionSpec& a, const Forest& f);
// Applies every selected action once, in catalog order.
SessionState apply_plan(SessionState s, const Genome& genome, const ActionCatalog& catalog, const Forest& f);
double evaluate(const SessionState& s, const Forest& f);
SessionState undo(SessionState s, const Forest& f);

// Indicator vector after applying `genome` to `current` (no bookkeeping).
std::vector<double> plan_indicators(std::span<const double> baseline, std::span<const double> current,
                                    const Genome& genome, const ActionCatalog& catalog);

nlohmann::json session_to_json(const SessionState& s);
SessionState session_from_json(const nlohmann::json& j);

}  // namespace maasim
