// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_RNG_HPP
#define CMAUG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

// Thin deterministic sampling helpers over std::mt19937_64. The standard
// distribution objects are implementation-defined, so every draw we rely on
// for reproducibility is pinned here instead.
namespace cmaug::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(splitmix64(master) ^ splitmix64(~tag));
}

// Named-stream variant; the tag string is folded with FNV-1a first.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(master, h);
}

// Uniform in [0, n), unbiased via rejection.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

// Uniform integer in [lo, hi] inclusive.
inline int uniform_int(Engine& eng, int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  return lo + static_cast<int>(uniform_index(eng, static_cast<std::size_t>(hi - lo) + 1));
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Box-Muller, one value per call (two uniforms consumed).
inline double normal(Engine& eng, double mean = 0.0, double stddev = 1.0) {
  double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

}  // namespace cmaug::rng

#endif  // CMAUG_RNG_HPP
