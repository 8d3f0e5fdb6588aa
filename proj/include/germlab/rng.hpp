#pragma once

#include <cmath>
#include <cstdint>

namespace germlab {

/// Counter-based deterministic generator: every draw is a pure function of
/// (seed, counter), so parallel consumers can draw without shared state.
inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t counter) {
  return hash_mix(seed * 0x2545f4914f6cdd1dULL + counter);
}

/// Uniform draw in [0, 1).
inline double unit_real(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(hash_mix(seed, counter) >> 11) * 0x1.0p-53;
}

/// Uniform draw in [a, b).
inline double uniform_real(std::uint64_t seed, std::uint64_t counter, double a, double b) {
  return a + (b - a) * unit_real(seed, counter);
}

/// Low-discrepancy Kronecker sequence in [0,1), seeded by a rotation.
/// Axis 0 uses the golden ratio, axis 1 the plastic-number companion.
inline double kronecker(std::uint64_t seed, std::uint64_t index, int axis) {
  static constexpr double alpha[2] = {0.6180339887498949, 0.7548776662466927};
  double rot = static_cast<double>(hash_mix(seed, 0x5eedULL + static_cast<std::uint64_t>(axis)) >> 11) * 0x1.0p-53;
  double v = rot + static_cast<double>(index + 1) * alpha[axis & 1];
  return v - std::floor(v);
}

}  // namespace germlab
