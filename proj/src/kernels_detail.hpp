// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_KERNELS_DETAIL_HPP
#define CMAUG_KERNELS_DETAIL_HPP

#include <cstddef>

namespace cmaug::kern::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  void (*add_scalar)(const double*, double, double*, std::size_t);
};

const KernelTable& scalar_table();
// Null when this build or CPU cannot run AVX2 code.
const KernelTable* avx2_table();
bool cpu_has_avx2();

}  // namespace cmaug::kern::detail

#endif  // CMAUG_KERNELS_DETAIL_HPP
