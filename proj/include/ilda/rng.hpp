// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ilda/errors.hpp"

namespace ilda {

// Named sub-streams derived from one user seed. Every consumer of randomness
// gets its own stream so that adding draws in one place never shifts the
// sequence seen by another.
namespace streams {
inline constexpr std::uint64_t kInitNoise = 1;
inline constexpr std::uint64_t kSampler = 2;
inline constexpr std::uint64_t kDelay = 3;
inline constexpr std::uint64_t kSimCompute = 4;
inline constexpr std::uint64_t kSynth = 5;
inline constexpr std::uint64_t kSplit = 6;
inline constexpr std::uint64_t kShards = 7;
inline constexpr std::uint64_t kVisitOrder = 8;
}  // namespace streams

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Derives an independent seed for a named (stream, substream) pair.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t substream = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = detail::splitmix64(s);
  s = h ^ (stream * 0xd1342543de82ef95ULL);
  h = detail::splitmix64(s);
  s = h ^ (substream * 0xaf251af3b0f025b5ULL);
  return detail::splitmix64(s);
}

/// Deterministic random source. The engine is std::mt19937_64 (a fixed
/// bitstream by the standard) and every draw algorithm is implemented here,
/// so sequences are identical across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Unbiased via bitmask rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ContractError("uniform_below: n must be positive");
    if (n == 1) return 0;
    const int bits = std::bit_width(n - 1);
    const int shift = 64 - bits;
    std::uint64_t r;
    do {
      r = engine_() >> shift;
    } while (r >= n);
    return r;
  }

  /// Standard normal via the polar method. The second variate of each
  /// accepted pair is discarded to keep the generator stateless.
  double normal() {
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(shape, scale) by Marsaglia and Tsang's squeeze method, with the
  /// usual boost for shape < 1.
  double gamma(double shape, double scale = 1.0) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw ContractError("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  /// Fisher-Yates shuffle driven by uniform_below.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ilda
