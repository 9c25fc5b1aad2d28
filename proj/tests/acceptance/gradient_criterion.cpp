// SPDX-License-Identifier: Apache-2.0
#include "gradient_criterion.hpp"

#include <chrono>
#include <cstdio>

#include "inlg/diagnostics.hpp"

namespace acceptance {

GradientOutcome tiny_gradient_check(std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const inlg::TinyCheckReport r = inlg::check_tiny_model(seed);
  GradientOutcome out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.max_relative_error = r.max_relative_error();
  for (const auto& [name, res] : r.checks) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%s=%.2e", out.detail.empty() ? "" : " ", name.c_str(),
                  res.max_relative_error);
    out.detail += buf;
  }
  return out;
}

}  // namespace acceptance
