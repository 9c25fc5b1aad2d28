// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace acceptance {

struct GradientOutcome {
  double max_relative_error = 0;
  double seconds = 0;
  std::string detail;  // per-check errors
};

// Runs the tiny-model finite-difference checks in double precision.
GradientOutcome tiny_gradient_check(std::uint64_t seed);

}  // namespace acceptance
