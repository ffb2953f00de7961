#include "maasim/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "detail/kernels.hpp"

namespace maasim {

void PruneReport::merge(const PruneReport& other) {
  removed_constant.insert(removed_constant.end(), other.removed_constant.begin(), other.removed_constant.end());
  removed_correlated.insert(removed_correlated.end(), other.removed_correlated.begin(),
                            other.removed_correlated.end());
  for (const auto& [c, n] : other.removed_classes) removed_classes[c] += n;
  removed_unimportant.insert(removed_unimportant.end(), other.removed_unimportant.begin(),
                             other.removed_unimportant.end());
}

std::string PruneReport::to_text() const {
  std::ostringstream out;
  for (const auto& n : removed_constant) out << "constant\t" << n << "\n";
  for (const auto& [kept, dropped] : removed_correlated)
    out << "correlated\t" << dropped << "\t|r|=1 with " << kept << "\n";
  for (const auto& [c, n] : removed_classes) out << "rare-class\t" << c << "\t" << n << " rows\n";
  for (const auto& n : removed_unimportant) out << "low-importance\t" << n << "\n";
  return out.str();
}

nlohmann::json PruneReport::to_json() const {
  nlohmann::json j;
  j["removed_constant"] = removed_constant;
  j["removed_correlated"] = nlohmann::json::array();
  for (const auto& [kept, dropped] : removed_correlated)
    j["removed_correlated"].push_back({{"kept", kept}, {"dropped", dropped}});
  j["removed_classes"] = nlohmann::json::object();
  for (const auto& [c, n] : removed_classes) j["removed_classes"][std::to_string(c)] = n;
  j["removed_unimportant"] = removed_unimportant;
  return j;
}

std::pair<Dataset, PruneReport> drop_constant(const Dataset& ds) {
  PruneReport report;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < ds.rows() && constant; ++r) constant = ds.records(r, c) == ds.records(0, c);
    if (ds.rows() < 2) constant = true;
    if (constant)
      report.removed_constant.push_back(ds.meta[c].name);
    else
      keep.push_back(c);
  }
  if (keep.empty()) throw EmptyDatasetError("every indicator is constant");
  if (report.removed_constant.empty()) return {ds, report};
  return {select_columns(ds, keep), report};
}

namespace {

void require_non_constant(const Matrix& records, const detail::ColumnMoments& m,
                          const std::vector<std::string>& names) {
  if (records.rows() < 2) throw DegenerateColumnError("correlation needs at least two rows");
  for (std::size_t c = 0; c < m.norm.size(); ++c)
    if (!(m.norm[c] > 0.0)) throw DegenerateColumnError("indicator '" + names[c] + "' is constant");
}

}  // namespace

CorrelationMatrix correlation_matrix(const Matrix& records, std::vector<std::string> names) {
  const auto m = detail::column_moments(records);
  require_non_constant(records, m, names);
  const std::size_t p = records.cols();
  CorrelationMatrix out{Matrix(p, p, 0.0), std::move(names)};
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ai = 0; ai < static_cast<std::ptrdiff_t>(p); ++ai) {
    const auto a = static_cast<std::size_t>(ai);
    out.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      const double r = detail::pearson(records, m, a, b);
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

CorrelationMatrix correlation_matrix(const Dataset& ds) { return correlation_matrix(ds.records, ds.names()); }

std::pair<Dataset, PruneReport> drop_perfect_correlation(const Dataset& ds, double tol) {
  const auto corr = correlation_matrix(ds);
  PruneReport report;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    bool dropped = false;
    for (auto i : keep) {
      if (std::abs(corr.values(i, j)) >= 1.0 - tol) {
        report.removed_correlated.emplace_back(ds.meta[i].name, ds.meta[j].name);
        dropped = true;
        break;
      }
    }
    if (!dropped) keep.push_back(j);
  }
  if (report.removed_correlated.empty()) return {ds, report};
  return {select_columns(ds, keep), report};
}

std::pair<Dataset, PruneReport> filter_rare_classes(const Dataset& ds, std::size_t min_count) {
  PruneReport report;
  std::map<int, std::size_t> counts;
  for (int c : ds.classes) ++counts[c];
  for (const auto& [c, n] : counts)
    if (n < min_count) report.removed_classes[c] = n;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.rows(); ++r)
    if (!report.removed_classes.contains(ds.classes[r])) keep.push_back(r);
  if (keep.empty()) throw EmptyDatasetError("every class has fewer than " + std::to_string(min_count) + " rows");
  if (report.removed_classes.empty()) return {ds, report};
  return {select_rows(ds, keep), report};
}

std::vector<std::vector<std::size_t>> nearest_neighbours(const Matrix& x, const std::vector<std::size_t>& members,
                                                         std::size_t k) {
  std::vector<std::vector<std::size_t>> out(members.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(members.size()); ++i)
    out[static_cast<std::size_t>(i)] = detail::knn_for(x, members, static_cast<std::size_t>(i), k);
  return out;
}

SmoteResult smote_detailed(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ConfigError("smote: k must be at least 1");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < ds.rows(); ++r) by_class[ds.classes[r]].push_back(r);
  std::size_t majority = 0;
  for (const auto& [c, rows] : by_class) {
    if (rows.size() < 2)
      throw TooFewSamplesError("smote: class " + std::to_string(c) + " has a single row");
    majority = std::max(majority, rows.size());
  }

  SmoteResult out;
  out.data = ds;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap_dist(0.0, 1.0);
  std::vector<double> synthetic(ds.cols());
  for (const auto& [c, members] : by_class) {
    const std::size_t m = members.size();
    if (m == majority) continue;
    const auto neighbours = nearest_neighbours(ds.records, members, std::min(k, m - 1));
    for (std::size_t i = 0; i < majority - m; ++i) {
      const std::size_t local = i % m;
      const auto& nn = neighbours[local];
      std::uniform_int_distribution<std::size_t> pick(0, nn.size() - 1);
      const std::size_t base = members[local];
      const std::size_t neighbour = nn[pick(rng)];
      const double g = gap_dist(rng);
      const auto x = ds.records.row(base);
      const auto n = ds.records.row(neighbour);
      for (std::size_t f = 0; f < synthetic.size(); ++f) synthetic[f] = x[f] + g * (n[f] - x[f]);
      out.origins.push_back({out.data.rows(), base, neighbour, g});
      out.data.records.append_row(synthetic);
      out.data.classes.push_back(c);
      out.data.ids.push_back("smote-" + std::to_string(c) + "-" + std::to_string(i + 1));
    }
  }
  return out;
}

Dataset smote(const Dataset& ds, std::size_t k, std::uint64_t seed) { return smote_detailed(ds, k, seed).data; }

}  // namespace maasim
