// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_FD_HPP
#define CMAUG_FD_HPP

#include <algorithm>
#include <cmath>

namespace cmaug::fd {

// Central difference of eval() with respect to one scalar slot; the slot
// is restored before returning.
template <typename F>
double central(double& slot, double step, F&& eval) {
  const double orig = slot;
  slot = orig + step;
  const double plus = eval();
  slot = orig - step;
  const double minus = eval();
  slot = orig;
  return (plus - minus) / (2.0 * step);
}

// Relative error with a magnitude floor. Entries far below the natural
// gradient scale cannot be resolved relatively by central differences
// (the quotient is dominated by rounding noise in the two evaluations),
// so anything under the floor is effectively compared absolutely.
inline double rel_error(double got, double want) {
  const double denom = std::max({std::abs(got), std::abs(want), 1e-4});
  return std::abs(got - want) / denom;
}

}  // namespace cmaug::fd

#endif  // CMAUG_FD_HPP
