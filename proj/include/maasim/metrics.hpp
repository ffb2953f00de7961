#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "maasim/moo.hpp"

namespace maasim {

struct SpreadResult {
  double value = 0.0;
  bool degenerate = false;  // single distinct member
};

// Both measures work on the distinct objective vectors of `front`, scaled by
// the extent of `reference` (an axis with zero extent is left unscaled).
SpreadResult spread(std::span<const Objectives> front, std::span<const Objectives> reference);
double spacing(std::span<const Objectives> front, std::span<const Objectives> reference);

SpreadResult spread(const Front& front, const Front& reference);
double spacing(const Front& front, const Front& reference);

// Number of distinct genomes.
std::size_t cardinality(const Front& front);

struct Extremes {
  double best_score = 0.0;
  std::size_t min_turns = 0;
};
Extremes extremes(std::span<const Objectives> front);
Extremes extremes(const Front& front);

struct MetricReport {
  double spread = 0.0;
  bool spread_degenerate = false;
  double spacing = 0.0;
  std::size_t cardinality = 0;
  double best_score = 0.0;
  std::size_t min_turns = 0;
};

MetricReport measure(const Front& front, const Front& reference);

std::vector<Objectives> objectives_of(const Front& f);

enum class Alternative { two_sided, a_greater, a_less };
enum class Direction { a_better, b_better, none };
enum class PMethod { automatic, exact, normal };

struct RankTestResult {
  double u_statistic = 0.0;  // U of sample a: pairs a > b, ties counted half
  double p_value = 1.0;
  Direction direction = Direction::none;  // a_better: a tends to be larger
  bool exact = false;
};

// Wilcoxon-Mann-Whitney. automatic: exact null distribution when
// n_a + n_b <= 12 without ties, otherwise the normal approximation with tie
// and continuity corrections.
RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                              Alternative alternative = Alternative::two_sided, PMethod method = PMethod::automatic);

enum class Better { higher, lower };

struct SignificanceMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<bool>> better;  // better[row][col]: row significantly beats col

  nlohmann::json to_json() const;
};

SignificanceMatrix significance_matrix(const std::map<std::string, std::vector<double>>& runs, Better better,
                                       double alpha = 0.05);

}  // namespace maasim
