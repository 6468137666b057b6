#pragma once

#include <cstdint>

namespace crowdsync {

/// SplitMix64 output finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent 64-bit seed for sub-run `index` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed + 0x9E3779B97F4A7C15ULL) ^ (index + 0xD1B54A32D192ED03ULL));
}

/**
 * Counter-based random stream.
 *
 * A stream is fully determined by (seed, lane, index); in the simulator the
 * lane is the agent id and the index the step (or trial) number. Draws are
 * SplitMix64 outputs of a state keyed from that triple, so any agent's noise
 * at any step can be reproduced without replaying other agents or steps.
 */
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t lane, std::uint64_t index) noexcept
      : state_(mix64(derive_seed(seed, lane) ^ (index * 0xC2B2AE3D27D4EB4FULL + 0x165667B19E3779F9ULL))) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two draws and discards the sine branch.
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace crowdsync
