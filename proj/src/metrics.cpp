#include "maasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace maasim {

namespace {

struct Point {
  double s;
  double t;
};

std::vector<Objectives> distinct_sorted(std::span<const Objectives> v) {
  std::vector<Objectives> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.turns < b.turns;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

class Scaler {
 public:
  explicit Scaler(std::span<const Objectives> reference) {
    if (reference.empty()) throw EmptyFrontError("reference front is empty");
    double lo_s = reference[0].score, hi_s = lo_s;
    double lo_t = static_cast<double>(reference[0].turns), hi_t = lo_t;
    for (const auto& o : reference) {
      lo_s = std::min(lo_s, o.score);
      hi_s = std::max(hi_s, o.score);
      lo_t = std::min(lo_t, static_cast<double>(o.turns));
      hi_t = std::max(hi_t, static_cast<double>(o.turns));
    }
    lo_s_ = lo_s;
    lo_t_ = lo_t;
    ext_s_ = hi_s > lo_s ? hi_s - lo_s : 1.0;
    ext_t_ = hi_t > lo_t ? hi_t - lo_t : 1.0;
  }

  Point operator()(const Objectives& o) const {
    return {(o.score - lo_s_) / ext_s_, (static_cast<double>(o.turns) - lo_t_) / ext_t_};
  }

 private:
  double lo_s_, lo_t_, ext_s_, ext_t_;
};

double distance(const Point& a, const Point& b) { return std::hypot(a.s - b.s, a.t - b.t); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// counts[u] = number of orderings of n_a + n_b distinct values giving U = u.
std::vector<double> exact_u_counts(std::size_t na, std::size_t nb) {
  // table[i][j] holds the distribution for sample sizes (i, j).
  std::vector<std::vector<std::vector<double>>> table(na + 1, std::vector<std::vector<double>>(nb + 1));
  for (std::size_t i = 0; i <= na; ++i)
    for (std::size_t j = 0; j <= nb; ++j) {
      auto& cur = table[i][j];
      cur.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        cur[0] = 1.0;
        continue;
      }
      // Largest value belongs to a (beats all j of b) or to b.
      const auto& from_a = table[i - 1][j];
      const auto& from_b = table[i][j - 1];
      for (std::size_t u = 0; u < from_a.size(); ++u) cur[u + j] += from_a[u];
      for (std::size_t u = 0; u < from_b.size(); ++u) cur[u] += from_b[u];
    }
  return table[na][nb];
}

}  // namespace

SpreadResult spread(std::span<const Objectives> front, std::span<const Objectives> reference) {
  if (front.empty()) throw EmptyFrontError("spread of an empty front");
  const Scaler scale(reference);
  const auto f = distinct_sorted(front);
  const auto r = distinct_sorted(reference);
  const double d_f = distance(scale(r.front()), scale(f.front()));
  const double d_l = distance(scale(r.back()), scale(f.back()));
  if (f.size() == 1) return {d_f + d_l > 0.0 ? 1.0 : 0.0, true};

  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) d.push_back(distance(scale(f[i]), scale(f[i + 1])));
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double dev = 0.0;
  for (double v : d) dev += std::abs(v - mean);
  const double den = d_f + d_l + static_cast<double>(f.size() - 1) * mean;
  return {den > 0.0 ? (d_f + d_l + dev) / den : 0.0, false};
}

double spacing(std::span<const Objectives> front, std::span<const Objectives> reference) {
  if (front.empty()) throw EmptyFrontError("spacing of an empty front");
  const Scaler scale(reference);
  const auto f = distinct_sorted(front);
  if (f.size() == 1) return 0.0;
  std::vector<double> d;
  for (const auto& o : f) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ref : reference) best = std::min(best, distance(scale(o), scale(ref)));
    d.push_back(best);
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (mean - v) * (mean - v);
  return std::sqrt(ss / static_cast<double>(d.size() - 1));
}

std::vector<Objectives> objectives_of(const Front& f) {
  std::vector<Objectives> out;
  out.reserve(f.size());
  for (const auto& ind : f) out.push_back(ind.obj);
  return out;
}

SpreadResult spread(const Front& front, const Front& reference) {
  return spread(objectives_of(front), objectives_of(reference));
}

double spacing(const Front& front, const Front& reference) {
  return spacing(objectives_of(front), objectives_of(reference));
}

std::size_t cardinality(const Front& front) {
  std::set<Genome> seen;
  for (const auto& ind : front) seen.insert(ind.genome);
  return seen.size();
}

Extremes extremes(std::span<const Objectives> front) {
  if (front.empty()) throw EmptyFrontError("extremes of an empty front");
  Extremes e{front[0].score, front[0].turns};
  for (const auto& o : front) {
    e.best_score = std::max(e.best_score, o.score);
    e.min_turns = std::min(e.min_turns, o.turns);
  }
  return e;
}

Extremes extremes(const Front& front) { return extremes(objectives_of(front)); }

MetricReport measure(const Front& front, const Front& reference) {
  MetricReport m;
  const auto sp = spread(front, reference);
  m.spread = sp.value;
  m.spread_degenerate = sp.degenerate;
  m.spacing = spacing(front, reference);
  m.cardinality = cardinality(front);
  const auto e = extremes(front);
  m.best_score = e.best_score;
  m.min_turns = e.min_turns;
  return m;
}

RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative,
                              PMethod method) {
  if (a.empty() || b.empty()) throw EmptySampleError("Mann-Whitney needs two non-empty samples");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;

  std::vector<std::pair<double, bool>> all;  // (value, from a)
  for (double v : a) all.push_back({v, true});
  for (double v : b) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum_a += mid;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  RankTestResult r;
  r.u_statistic = rank_sum_a - static_cast<double>(na * (na + 1)) / 2.0;
  const bool ties = tie_term > 0.0;
  const bool use_exact = method == PMethod::exact ? !ties : method == PMethod::automatic && n <= 12 && !ties;

  double p_greater = 1.0, p_less = 1.0;  // P(U >= u), P(U <= u) under the null
  if (use_exact) {
    r.exact = true;
    const auto counts = exact_u_counts(na, nb);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u = static_cast<std::size_t>(std::llround(r.u_statistic));
    double le = 0.0, ge = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (k <= u) le += counts[k];
      if (k >= u) ge += counts[k];
    }
    p_less = le / total;
    p_greater = ge / total;
  } else {
    const double mu = static_cast<double>(na * nb) / 2.0;
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(na * nb) / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var > 0.0) {
      const double sd = std::sqrt(var);
      p_greater = normal_sf((r.u_statistic - mu - 0.5) / sd);
      p_less = normal_sf((mu - r.u_statistic - 0.5) / sd);
    }
  }
  p_greater = std::min(1.0, p_greater);
  p_less = std::min(1.0, p_less);

  switch (alternative) {
    case Alternative::a_greater:
      r.p_value = p_greater;
      break;
    case Alternative::a_less:
      r.p_value = p_less;
      break;
    case Alternative::two_sided:
      r.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less));
      break;
  }
  if (p_greater < 0.05)
    r.direction = Direction::a_better;
  else if (p_less < 0.05)
    r.direction = Direction::b_better;
  return r;
}

SignificanceMatrix significance_matrix(const std::map<std::string, std::vector<double>>& runs, Better better,
                                       double alpha) {
  if (runs.size() < 2) throw ShapeError("significance matrix needs at least two algorithms");
  const std::size_t len = runs.begin()->second.size();
  SignificanceMatrix m;
  std::vector<const std::vector<double>*> samples;
  for (const auto& [name, values] : runs) {
    if (values.size() != len) throw ShapeError("run lists differ in length for '" + name + "'");
    m.names.push_back(name);
    samples.push_back(&values);
  }
  const std::size_t k = m.names.size();
  const Alternative alt = better == Better::higher ? Alternative::a_greater : Alternative::a_less;
  m.better.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) m.better[i][j] = mann_whitney_u(*samples[i], *samples[j], alt).p_value < alpha;
  return m;
}

nlohmann::json SignificanceMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : better) rows.push_back(row);
  return {{"algorithms", names}, {"better", std::move(rows)}};
}

}  // namespace maasim
