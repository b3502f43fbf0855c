// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace pirem {

/// Counter-based splittable RNG (SplitMix64 core). Streams derived with
/// derive_seed() are independent, so sweep cells can run in any order or in
/// parallel and still produce the same draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0,1), 53-bit mantissa.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller (cosine branch only, two uniforms per draw).
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  /// N(0, sigma^2) conditioned on |w| <= radius, by rejection. Symmetric, so
  /// the conditional mean stays zero and the MGF only shrinks.
  double truncated_gaussian(double sigma, double radius) {
    if (radius <= 0.0) return 0.0;
    for (;;) {
      double w = gaussian(sigma);
      if (std::abs(w) <= radius) return w;
    }
  }

 private:
  std::uint64_t state_;
};

/// Mixes a master seed with up to three stream labels into a fresh seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(master ^ 0x853c49e6748fea9bULL);
  s = mix(s ^ (a + 0x9e3779b97f4a7c15ULL));
  s = mix(s ^ (b + 0xd1b54a32d192ed03ULL));
  s = mix(s ^ (c + 0x2545f4914f6cdd1dULL));
  return s;
}

}  // namespace pirem
