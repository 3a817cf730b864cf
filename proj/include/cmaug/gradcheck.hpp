// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_GRADCHECK_HPP
#define CMAUG_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cmaug {

struct GradCheckCase {
  std::string name;
  std::size_t instances = 0;
  std::size_t entries_checked = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Seeded gradient checks against central finite differences: CTC,
// soft-DTW at gamma 0.1 and 1.0, the cosine-cost/soft-DTW chain, and the
// full weighted training objective on a tiny model.
std::vector<GradCheckCase> run_gradient_checks(std::uint64_t seed,
                                               std::size_t instances_per_case);

bool all_passed(const std::vector<GradCheckCase>& cases);

}  // namespace cmaug

#endif  // CMAUG_GRADCHECK_HPP
