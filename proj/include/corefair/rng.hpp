#pragma once

#include <cstdint>
#include <random>

namespace corefair {

// std::mt19937_64 output is fixed by the standard, the std distributions are
// not. Everything below derives draws from raw engine output so that a seed
// gives identical results on every standard library.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Engine for trial `stream` of a run seeded with `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL)));
}

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [lo, hi] (inclusive), unbiased.
inline std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo,
                                 std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return rng();
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % span;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return lo + r % span;
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
  return uniform01(rng) < p;
}

}  // namespace corefair
