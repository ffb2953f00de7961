#include "maasim/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace maasim {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return out;
}

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw FormatError("correlation matrix must be square");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12) throw FormatError("correlation matrix is not symmetric");
}

}  // namespace

KmoResult kmo(const CorrelationMatrix& c) {
  require_symmetric(c.values);
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd r = to_eigen(c.values);

  double r2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) r2 += r(i, j) * r(i, j);
  if (r2 == 0.0) throw UndefinedError("KMO undefined: all off-diagonal correlations are zero");

  KmoResult out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-10) {
    r += 1e-8 * Eigen::MatrixXd::Identity(n, n);
    out.ridge_applied = true;
  }
  const Eigen::MatrixXd inv = r.ldlt().solve(Eigen::MatrixXd::Identity(n, n));

  double p2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = -inv(i, j) / std::sqrt(inv(i, i) * inv(j, j));
      p2 += p * p;
    }
  out.value = r2 / (r2 + p2);
  return out;
}

std::vector<double> communalities(const CorrelationMatrix& c, std::size_t n_factors) {
  require_symmetric(c.values);
  const std::size_t n = c.size();
  if (n_factors < 1 || n_factors > n) throw ShapeError("communalities: need 1 <= n_factors <= dimension");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(c.values));
  if (es.info() != Eigen::Success) throw UndefinedError("eigendecomposition failed");
  const Eigen::VectorXd evals = es.eigenvalues();
  const Eigen::MatrixXd evecs = es.eigenvectors();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return evals(a) > evals(b); });

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd basis(ni, ni);
  Eigen::VectorXd values(ni);
  const double scale = std::max(1.0, std::abs(evals.maxCoeff()));
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && std::abs(evals(order[start]) - evals(order[stop])) <= 1e-9 * scale) ++stop;
    const auto m = static_cast<Eigen::Index>(stop - start);
    Eigen::MatrixXd vc(ni, m);
    for (Eigen::Index j = 0; j < m; ++j) vc.col(j) = evecs.col(order[start + static_cast<std::size_t>(j)]);
    if (m == 1) {
      basis.col(static_cast<Eigen::Index>(start)) = vc.col(0);
    } else {
      // Project e_0, e_1, ... onto the eigenspace and orthonormalise in order.
      const Eigen::MatrixXd proj = vc * vc.transpose();
      Eigen::Index chosen = 0;
      for (Eigen::Index i = 0; i < ni && chosen < m; ++i) {
        Eigen::VectorXd v = proj.col(i);
        for (Eigen::Index j = 0; j < chosen; ++j) {
          const auto col = basis.col(static_cast<Eigen::Index>(start) + j);
          v -= col.dot(v) * col;
        }
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        basis.col(static_cast<Eigen::Index>(start) + chosen) = v / norm;
        ++chosen;
      }
    }
    for (std::size_t j = start; j < stop; ++j) values(static_cast<Eigen::Index>(j)) = evals(order[j]);
    start = stop;
  }

  std::vector<double> h(n, 0.0);
  for (std::size_t j = 0; j < n_factors; ++j) {
    const double lambda = std::max(values(static_cast<Eigen::Index>(j)), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      h[i] += v * v * lambda;
    }
  }
  return h;
}

GroupWeights group_weights(const Forest& f, const Dataset& ds, const std::map<std::size_t, Group>& groups) {
  if (ds.cols() != f.n_features) throw ShapeError("group_weights: dataset and model widths differ");
  for (std::size_t k = 0; k < f.n_features; ++k)
    if (!groups.contains(k)) throw ConfigError("group_weights: indicator " + std::to_string(k) + " has no group");

  std::vector<double> mean_abs(f.n_features, 0.0);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto d = decompose(f, ds.records.row(r));
    for (std::size_t k = 0; k < d.contributions.size(); ++k) mean_abs[k] += std::abs(d.contributions[k]);
  }
  if (ds.rows() > 0)
    for (auto& v : mean_abs) v /= static_cast<double>(ds.rows());

  GroupWeights gw;
  for (const auto& [k, g] : groups) {
    if (k >= f.n_features) throw ConfigError("group_weights: indicator index out of range");
    gw.groups[g].push_back({k, ds.meta[k].name, mean_abs[k]});
  }
  for (auto& [g, entries] : gw.groups) {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight;
    if (sum > 0.0) {
      for (auto& e : entries) e.weight /= sum;
    } else {
      for (auto& e : entries) e.weight = 1.0 / static_cast<double>(entries.size());
      gw.uniform_fallback.push_back(g);
    }
  }
  return gw;
}

GroupWeights group_weights(const Forest& f, const Dataset& ds) {
  std::map<std::size_t, Group> groups;
  for (const auto& m : ds.meta) groups[m.index] = m.group;
  return group_weights(f, ds, groups);
}

std::map<Group, double> group_scores(std::span<const double> x, const GroupWeights& gw,
                                     std::span<const double> baselines) {
  std::map<Group, double> out;
  for (const auto& [g, entries] : gw.groups) {
    double s = 0.0;
    for (const auto& e : entries) {
      if (e.indicator >= x.size() || e.indicator >= baselines.size())
        throw ShapeError("group_scores: indicator index out of range");
      const double b = baselines[e.indicator];
      if (!(b > 0.0)) throw BaselineError("indicator '" + e.name + "' has a non-positive baseline");
      s += e.weight * x[e.indicator] / b;
    }
    out[g] = s;
  }
  return out;
}

nlohmann::json GroupWeights::to_json() const {
  nlohmann::json j;
  j["groups"] = nlohmann::json::object();
  for (const auto& [g, entries] : groups) {
    auto& arr = j["groups"][std::string(to_string(g))] = nlohmann::json::array();
    for (const auto& e : entries) arr.push_back({{"indicator", e.name}, {"index", e.indicator}, {"weight", e.weight}});
  }
  j["uniform_fallback"] = nlohmann::json::array();
  for (auto g : uniform_fallback) j["uniform_fallback"].push_back(std::string(to_string(g)));
  return j;
}

GroupWeights GroupWeights::from_json(const nlohmann::json& j, std::span<const std::string> feature_names) {
  try {
    GroupWeights gw;
    for (const auto& [name, arr] : j.at("groups").items()) {
      const Group g = group_from_string(name);
      for (const auto& e : arr) {
        Entry entry;
        entry.name = e.at("indicator").get<std::string>();
        entry.weight = e.at("weight").get<double>();
        if (!feature_names.empty()) {
          const auto it = std::find(feature_names.begin(), feature_names.end(), entry.name);
          if (it == feature_names.end()) throw ReferenceError("group weights reference unknown indicator '" + entry.name + "'");
          entry.indicator = static_cast<std::size_t>(it - feature_names.begin());
        } else {
          entry.indicator = e.at("index").get<std::size_t>();
        }
        gw.groups[g].push_back(std::move(entry));
      }
    }
    if (j.contains("uniform_fallback"))
      for (const auto& g : j.at("uniform_fallback")) gw.uniform_fallback.push_back(group_from_string(g.get<std::string>()));
    return gw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed group weights: ") + e.what());
  }
}

}  // namespace maasim
