#pragma once

#include <cstdint>
#include <random>

namespace fxlearn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-(slot, step) stream so parallel execution cannot reorder
// randomness. mt19937_64 output is fully specified by the standard, so the
// same seed gives the same draws on every platform.
inline std::mt19937_64 derive_stream(std::uint64_t global_seed, std::uint64_t slot,
                                     std::uint64_t step = 0) {
  std::uint64_t s = splitmix64(global_seed ^ splitmix64(slot + 0x1000) ^
                               splitmix64(step + 0x2000000));
  return std::mt19937_64(s);
}

// Uniform in [lo, hi) from raw 53-bit mantissa draws (distribution classes are
// implementation-defined; this stays reproducible across standard libraries).
inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline double normal(std::mt19937_64& rng) {
  // Box-Muller on raw uniforms, again for cross-platform reproducibility.
  double u1 = uniform(rng);
  double u2 = uniform(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace fxlearn
