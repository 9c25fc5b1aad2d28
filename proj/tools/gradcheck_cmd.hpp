// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

// Runs the tiny-model gradient check in double precision, prints one line
// per check and returns the overall max relative error.
double run_tiny_gradcheck(std::uint64_t seed, double eps, const std::string& mapping,
                          std::ostream& out);
