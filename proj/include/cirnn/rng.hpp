// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace cirnn {

/// xoshiro256** generator, state expanded from the seed with SplitMix64.
///
/// SplitMix64: z += 0x9E3779B97F4A7C15; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///             z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31).
/// xoshiro256**: result = rotl(s1 * 5, 7) * 9, then the standard 17/45 shift-rotate
/// state update.
///
/// Only integer arithmetic is involved in the raw stream, so equal seeds give
/// bit-identical sequences on every platform. Uniform doubles take the top
/// 53 bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one draw per call, pair cached).
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Uniform integer on [0, n), n > 0, rejection-sampled (no modulo bias).
  std::uint64_t below(std::uint64_t n) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace cirnn
