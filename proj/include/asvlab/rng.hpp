#pragma once

#include <cmath>
#include <cstdint>

#include "asvlab/common.hpp"

namespace asv {

namespace detail {

// SplitMix64 output function. Passes BigCrush; one multiply-xor pipeline per
// draw keeps the generator branch-free and trivially portable.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator with explicit stream splitting.
///
/// The state is derived from (master_seed, stream, episode), so any
/// environment slot can reconstruct its generator from scratch without
/// touching shared state. Two generators with different key tuples produce
/// statistically independent sequences; the same tuple always produces the
/// same sequence regardless of what other streams were consumed. That is the
/// whole determinism story for the batch environment: results can never
/// depend on thread scheduling because no generator is ever shared.
class SplitRng {
 public:
  SplitRng() : SplitRng(0, 0, 0) {}

  SplitRng(std::uint64_t master_seed, std::uint64_t stream,
           std::uint64_t episode) {
    std::uint64_t k = detail::mix64(master_seed + 0x9E3779B97F4A7C15ull);
    k = detail::mix64(k ^ (stream + 1) * 0xD1342543DE82EF95ull);
    k = detail::mix64(k ^ (episode + 1) * 0xAF251AF3B0F025B5ull);
    state_ = k;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1): 53 high bits, so every value is exactly
  /// representable and 0 occurs with probability 2^-53.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [a, b). uniform(a, a) returns a, so a disabled randomization
  /// range still consumes exactly one draw and keeps streams aligned.
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller; the second variate of each pair is
  /// cached, so consecutive calls consume uniform draws in a fixed pattern.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream ids above any plausible environment index, reserved for
// non-environment consumers of the master seed.
inline constexpr std::uint64_t kStreamPolicyInit = 1ull << 40;
inline constexpr std::uint64_t kStreamShuffle = (1ull << 40) + 1;
inline constexpr std::uint64_t kStreamBench = (1ull << 40) + 2;
inline constexpr std::uint64_t kStreamAction = (1ull << 40) + 3;

}  // namespace asv
