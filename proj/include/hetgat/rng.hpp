// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hetgat {

// Deterministic random helpers on top of std::mt19937_64. The engine itself
// is fully specified by the standard; the std distributions are not, so the
// distribution code lives here and every draw consumes a documented number
// of engine outputs:
//   uniform_u64   — 1 draw (possibly more under rejection, < 1 + 2^-60 odds)
//   uniform01     — 1 draw
//   normal        — exactly 2 draws (Box-Muller, no caching)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_u64(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  int uniform_int(int n) { return static_cast<int>(uniform_u64(static_cast<std::uint64_t>(n))); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller; u1 is shifted away from 0 so the log is finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Stable per-index stream derivation (splitmix64 over seed ^ f(index)), so
// sample generation stays reproducible regardless of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hetgat
