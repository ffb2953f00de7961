#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "maasim/forest.hpp"
#include "maasim/genome.hpp"
#include "maasim/simcore.hpp"

namespace maasim {

// score is maximised, turns minimised; feasible individuals have turns >= 1.
struct Objectives {
  double score = 0.0;
  std::size_t turns = 0;

  friend bool operator==(const Objectives&, const Objectives&) = default;
};

struct Individual {
  Genome genome;
  Objectives obj;

  friend bool operator==(const Individual&, const Individual&) = default;
};

using Front = std::vector<Individual>;

struct AlgoConfig {
  std::size_t population = 100;
  std::size_t archive = 100;
  double epsilon = 0.01;
  std::size_t evaluations = 10000;
  std::optional<double> mutation_rate;  // 1 / genome_length when unset
  double crossover_rate = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

// A binary action-selection problem. score() must be pure and thread safe.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t genome_length() const = 0;
  // Range the score can take, used to normalise objectives for epsilon boxes.
  virtual std::pair<double, double> score_bounds() const = 0;
  virtual double score(const Genome& g) const = 0;
};

// Replays a genome on a session through the frozen forest.
class SimulationProblem final : public Problem {
 public:
  SimulationProblem(const Forest& forest, const ActionCatalog& catalog, SessionState base);

  std::size_t genome_length() const override { return catalog_->size(); }
  std::pair<double, double> score_bounds() const override;
  double score(const Genome& g) const override;

  const SessionState& base() const noexcept { return base_; }

 private:
  const Forest* forest_;
  const ActionCatalog* catalog_;
  SessionState base_;
};

// score = base + sum of the increments of the selected actions.
class AdditiveProblem final : public Problem {
 public:
  AdditiveProblem(double base, std::vector<double> increments, std::pair<double, double> bounds = {1.0, 6.0});

  std::size_t genome_length() const override { return increments_.size(); }
  std::pair<double, double> score_bounds() const override { return bounds_; }
  double score(const Genome& g) const override;

 private:
  double base_;
  std::vector<double> increments_;
  std::pair<double, double> bounds_;
};

// Throws InfeasibleError for the all-zero genome, ShapeError on length mismatch.
Objectives evaluate_genome(const Problem& p, const Genome& g);
Objectives evaluate_genome(const Genome& g, const SessionState& base, const Forest& f, const ActionCatalog& catalog);

bool dominates(const Objectives& a, const Objectives& b) noexcept;

// Fast non-dominated sort; returns indices into pop, best front first.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Individual> pop);

// Crowding distance of each member of a front (same order as the input).
std::vector<double> crowding_distance(std::span<const Individual> front);

// Rank-1 members of pop, first occurrence of each genome kept, input order.
Front non_dominated(std::span<const Individual> pop);

bool is_valid_front(std::span<const Individual> front);

enum class Algorithm { nsga2, paes, spea2, epsmoea };

inline constexpr Algorithm kAlgorithms[] = {Algorithm::nsga2, Algorithm::paes, Algorithm::spea2, Algorithm::epsmoea};

std::string_view to_string(Algorithm a) noexcept;
Algorithm algorithm_from_string(std::string_view s);  // ConfigError when unknown

Front nsga2(const Problem& p, const AlgoConfig& cfg);
Front paes(const Problem& p, const AlgoConfig& cfg);
Front spea2(const Problem& p, const AlgoConfig& cfg);
Front epsmoea(const Problem& p, const AlgoConfig& cfg);
Front run_algorithm(Algorithm a, const Problem& p, const AlgoConfig& cfg);

inline constexpr std::size_t kMaxBruteForceLength = 20;

// Exact non-dominated set over all 2^n - 1 feasible genomes, in mask order.
// Evaluation is parallel over genomes.
Front brute_force_front(const Problem& p);

// Sorted by turns, then score descending, then genome.
void sort_front(Front& f);

nlohmann::json run_to_json(Algorithm a, std::uint64_t seed, std::size_t evaluations, const Front& front);

namespace serial {
Front brute_force_front(const Problem& p);
}  // namespace serial

}  // namespace maasim
