#pragma once

// Per-item kernels shared by the OpenMP loops and their serial references.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "maasim/matrix.hpp"

namespace maasim::detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// k nearest members to members[self] (excluding itself); ties by member order.
inline std::vector<std::size_t> knn_for(const Matrix& x, const std::vector<std::size_t>& members, std::size_t self,
                                        std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(members.size());
  const auto origin = x.row(members[self]);
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (j == self) continue;
    d.emplace_back(squared_distance(origin, x.row(members[j])), j);
  }
  const std::size_t kk = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = members[d[i].second];
  return out;
}

struct ColumnMoments {
  std::vector<double> mean;
  std::vector<double> norm;  // sqrt of centred sum of squares
};

inline ColumnMoments column_moments(const Matrix& x) {
  ColumnMoments m{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 0.0)};
  const double n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) m.mean[c] += x(r, c);
  for (auto& v : m.mean) v /= n;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - m.mean[c];
      m.norm[c] += d * d;
    }
  for (auto& v : m.norm) v = std::sqrt(v);
  return m;
}

inline double pearson(const Matrix& x, const ColumnMoments& m, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) s += (x(r, a) - m.mean[a]) * (x(r, b) - m.mean[b]);
  return std::clamp(s / (m.norm[a] * m.norm[b]), -1.0, 1.0);
}

}  // namespace maasim::detail
