// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_SOFTDTW_HPP
#define CMAUG_SOFTDTW_HPP

#include <cstddef>
#include <span>

#include "cmaug/core.hpp"

namespace cmaug {

// gamma = 0 is the exact minimum; gamma > 0 the smoothed
// -gamma * log(sum_i exp(-a_i / gamma)), computed with min shift.
// +inf entries carry zero weight. Throws on empty input or gamma < 0.
double soft_min(std::span<const double> values, double gamma);

struct CostMatrix {
  Mat entries;  // T1 x T2, d(i, j)
  double gamma = 1.0;
  std::size_t zero_norm_pairs = 0;  // pairs where the division guard fired
};

// d(i, j) = 1 - cos(f1_i, f2_j), in [0, 2] up to rounding. A zero-norm
// vector on either side makes the pair cost exactly 1 and bumps the
// diagnostics counter.
CostMatrix cosine_cost(const FeatureSequence& f1, const FeatureSequence& f2,
                       double gamma = 1.0);

struct SoftDtwResult {
  double value = 0.0;  // accumulated cost at the bottom-right corner
  Mat table;           // full accumulated table, needed by the backward pass
};

// Soft-DTW over the cost matrix, soft_min at every cell. Boundary: the
// virtual origin is 0 and the first row / column accumulate along their
// single feasible direction. The value is unnormalized.
SoftDtwResult soft_dtw(const CostMatrix& cost);

// dD/dd(i,j): reverse DP over the stored table for gamma > 0; for gamma = 0
// the indicator of the backtraced optimal path (ties prefer diagonal, then
// the cost-row predecessor, then the cost-column predecessor). Entries lie
// in [0, 1]. Throws on cost/table shape mismatch.
Mat soft_dtw_grad(const CostMatrix& cost, const Mat& table);

// Convenience: soft-DTW distance between two feature sequences under the
// cosine cost.
double dtw_distance(const FeatureSequence& f1, const FeatureSequence& f2, double gamma);

}  // namespace cmaug

#endif  // CMAUG_SOFTDTW_HPP
