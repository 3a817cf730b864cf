// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_MAT_HPP
#define CMAUG_MAT_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmaug/kernels.hpp"

namespace cmaug {

// Row-major dense double matrix. Vectors are 1 x n or n x 1 as convenient.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), d_(rows * cols, value) {}

  static Mat from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Mat();
    Mat m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw std::invalid_argument("Mat::from_rows: ragged input");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return d_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return d_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {d_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {d_.data() + r * cols_, cols_}; }
  std::span<double> flat() { return {d_.data(), d_.size()}; }
  std::span<const double> flat() const { return {d_.data(), d_.size()}; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double v : d_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> d_;
};

// C = A * B, shapes [m x k] * [k x n]. Row-major friendly: accumulates
// C.row(i) += A(i,l) * B.row(l) so the inner loop is a contiguous axpy.
inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double w = a(i, l);
      if (w != 0.0) kern::axpy(w, b.row(l), ci);
    }
  }
  return c;
}

}  // namespace cmaug

#endif  // CMAUG_MAT_HPP
