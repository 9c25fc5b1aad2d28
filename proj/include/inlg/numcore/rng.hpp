// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "inlg/real.hpp"

INLG_NAMESPACE_BEGIN

/// xoshiro256** seeded through SplitMix64. Output is fully specified here
/// (no std:: distributions), so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for one consumer ("init", "data", "dropout", ...)
  /// derived from a single root seed.
  static Rng for_stream(std::uint64_t root_seed, std::string_view consumer);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; the spare value is cached.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

INLG_NAMESPACE_END
