#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maasim/error.hpp"

namespace maasim {

// Dense row-major matrix of doubles. Rows are observations throughout.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {values_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw ShapeError("row length does not match matrix width");
    values_.insert(values_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    auto dst = out.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c];
  }
  return out;
}

inline Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols) {
  Matrix out(m.rows(), cols.size());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = m(r, cols[j]);
  return out;
}

}  // namespace maasim
