#pragma once

#include <cstdint>

namespace gpilab::rng {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL;

// Derives a child key; chains of derive() give independent-looking streams.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t n) noexcept {
  return mix64((key + GOLDEN_GAMMA) ^ mix64(n + GOLDEN_GAMMA));
}

// Counter-based generator: output i is a pure function of (key, i), so any
// draw can be produced on any worker without shared state. The generators
// below (uniform, normal, gamma) are pinned algorithms: identical output on
// every platform for a given key.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  // Stream for variate slot `slot` of draw `draw` under `seed`.
  static Stream keyed(std::uint64_t seed, std::uint64_t draw, std::uint64_t slot = 0) {
    return Stream(derive_key(derive_key(seed, draw), slot));
  }

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * GOLDEN_GAMMA); }

  // Uniform on the open interval (0,1).
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller cosine branch (two uniforms per variate).
  double next_normal();

  // Gamma(shape, scale 1) by Marsaglia-Tsang squeeze rejection; shapes < 1
  // are boosted through Gamma(shape + 1) * U^(1/shape).
  double next_gamma(double shape);

  double next_chisq(double dof) { return 2.0 * next_gamma(0.5 * dof); }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace gpilab::rng
