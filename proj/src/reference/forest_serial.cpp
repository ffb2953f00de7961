// Serial references for forest training and batch prediction.

#include "detail/forest_kernels.hpp"

namespace maasim::serial {

Forest fit_forest(const Dataset& ds, const ForestConfig& cfg) {
  const auto resolved = detail::resolve_config(cfg, ds.cols());
  Forest f = detail::make_forest_shell(ds, resolved);
  const auto y = ds.targets();
  for (std::size_t t = 0; t < resolved.n_trees; ++t) f.trees[t] = detail::fit_forest_tree(ds.records, y, resolved, t);
  return f;
}

std::vector<double> predict_batch(const Forest& f, const Matrix& x) {
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(maasim::predict(f, x.row(r)));
  return out;
}

}  // namespace maasim::serial
