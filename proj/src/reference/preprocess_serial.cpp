// Serial references for the data-parallel preprocessing kernels.

#include "detail/kernels.hpp"
#include "maasim/preprocess.hpp"

namespace maasim::serial {

std::vector<std::vector<std::size_t>> nearest_neighbours(const Matrix& x, const std::vector<std::size_t>& members,
                                                         std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) out.push_back(detail::knn_for(x, members, i, k));
  return out;
}

CorrelationMatrix correlation_matrix(const Matrix& records, std::vector<std::string> names) {
  const auto m = detail::column_moments(records);
  if (records.rows() < 2) throw DegenerateColumnError("correlation needs at least two rows");
  for (std::size_t c = 0; c < m.norm.size(); ++c)
    if (!(m.norm[c] > 0.0)) throw DegenerateColumnError("indicator '" + names[c] + "' is constant");
  const std::size_t p = records.cols();
  CorrelationMatrix out{Matrix(p, p, 0.0), std::move(names)};
  for (std::size_t a = 0; a < p; ++a) {
    out.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      const double r = detail::pearson(records, m, a, b);
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

}  // namespace maasim::serial
