#pragma once
// Counter-based uniform generator. Every draw is a pure function of
// (seed, counter), so streaming consumers, worker pools, and re-runs all see
// identical values regardless of evaluation order.

#include <cstdint>

namespace snapspan {

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Uniform draw in [0, 1). Golden-ratio stride decorrelates consecutive
// counters; the +1 keeps (seed, 0) distinct from the bare seed.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL * (counter + 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform draw in (-amplitude, amplitude).
inline double uniform_symmetric(std::uint64_t seed, std::uint64_t counter,
                                double amplitude) noexcept {
  return amplitude * (2.0 * uniform01(seed, counter) - 1.0);
}

// Deterministic per-task seed for worker pools and realization loops.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace snapspan
