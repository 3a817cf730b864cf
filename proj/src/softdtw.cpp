// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/softdtw.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmaug/kernels.hpp"

namespace cmaug {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double soft_min(std::span<const double> values, double gamma) {
  if (values.empty()) throw std::invalid_argument("soft_min: empty input");
  if (gamma < 0.0) throw std::invalid_argument("soft_min: gamma must be >= 0");
  double m = kInf;
  for (double v : values)
    if (v < m) m = v;
  if (gamma == 0.0 || m == kInf) return m;
  double s = 0.0;
  for (double v : values)
    if (v != kInf) s += std::exp(-(v - m) / gamma);
  return m - gamma * std::log(s);
}

CostMatrix cosine_cost(const FeatureSequence& f1, const FeatureSequence& f2, double gamma) {
  if (f1.dim() != f2.dim())
    throw std::invalid_argument("cosine_cost: feature dimension mismatch");
  if (gamma < 0.0) throw std::invalid_argument("cosine_cost: gamma must be >= 0");
  const std::size_t t1 = f1.length(), t2 = f2.length();
  std::vector<double> n1(t1), n2(t2);
  for (std::size_t i = 0; i < t1; ++i) n1[i] = std::sqrt(kern::dot(f1.frame(i), f1.frame(i)));
  for (std::size_t j = 0; j < t2; ++j) n2[j] = std::sqrt(kern::dot(f2.frame(j), f2.frame(j)));

  CostMatrix cost;
  cost.gamma = gamma;
  cost.entries = Mat(t1, t2);
  for (std::size_t i = 0; i < t1; ++i) {
    for (std::size_t j = 0; j < t2; ++j) {
      if (n1[i] == 0.0 || n2[j] == 0.0) {
        cost.entries(i, j) = 1.0;
        ++cost.zero_norm_pairs;
      } else {
        cost.entries(i, j) = 1.0 - kern::dot(f1.frame(i), f2.frame(j)) / (n1[i] * n2[j]);
      }
    }
  }
  return cost;
}

SoftDtwResult soft_dtw(const CostMatrix& cost) {
  const Mat& d = cost.entries;
  if (d.empty()) throw std::invalid_argument("soft_dtw: empty cost matrix");
  const double gamma = cost.gamma;
  const std::size_t m = d.rows(), n = d.cols();
  SoftDtwResult out;
  out.table = Mat(m, n);
  Mat& r = out.table;
  r(0, 0) = d(0, 0);
  for (std::size_t i = 1; i < m; ++i) r(i, 0) = d(i, 0) + r(i - 1, 0);
  for (std::size_t j = 1; j < n; ++j) r(0, j) = d(0, j) + r(0, j - 1);
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 1; j < n; ++j) {
      const std::array<double, 3> prev = {r(i - 1, j), r(i, j - 1), r(i - 1, j - 1)};
      r(i, j) = d(i, j) + soft_min(prev, gamma);
    }
  }
  out.value = r(m - 1, n - 1);
  return out;
}

namespace {

// gamma = 0 subgradient: indicator of the backtraced optimal path. The
// argmin is re-derived from the table at each step, preferring diagonal,
// then (i-1, j), then (i, j-1).
Mat hard_path_indicator(const Mat& d, const Mat& r) {
  const std::size_t m = d.rows(), n = d.cols();
  Mat e(m, n);
  std::size_t i = m - 1, j = n - 1;
  e(i, j) = 1.0;
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = r(i - 1, j - 1), up = r(i - 1, j), left = r(i, j - 1);
      if (diag <= up && diag <= left) {
        --i, --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    e(i, j) = 1.0;
  }
  return e;
}

}  // namespace

Mat soft_dtw_grad(const CostMatrix& cost, const Mat& table) {
  const Mat& d = cost.entries;
  if (!d.same_shape(table)) throw std::invalid_argument("soft_dtw_grad: shape mismatch");
  if (d.empty()) throw std::invalid_argument("soft_dtw_grad: empty cost matrix");
  if (cost.gamma == 0.0) return hard_path_indicator(d, table);

  const double gamma = cost.gamma;
  const std::size_t m = d.rows(), n = d.cols();
  Mat e(m, n);
  e(m - 1, n - 1) = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t j = n; j-- > 0;) {
      if (i == m - 1 && j == n - 1) continue;
      double acc = 0.0;
      if (i + 1 < m)
        acc += e(i + 1, j) * std::exp((table(i + 1, j) - d(i + 1, j) - table(i, j)) / gamma);
      if (j + 1 < n)
        acc += e(i, j + 1) * std::exp((table(i, j + 1) - d(i, j + 1) - table(i, j)) / gamma);
      if (i + 1 < m && j + 1 < n)
        acc += e(i + 1, j + 1) *
               std::exp((table(i + 1, j + 1) - d(i + 1, j + 1) - table(i, j)) / gamma);
      e(i, j) = acc;
    }
  }
  return e;
}

double dtw_distance(const FeatureSequence& f1, const FeatureSequence& f2, double gamma) {
  return soft_dtw(cosine_cost(f1, f2, gamma)).value;
}

}  // namespace cmaug
