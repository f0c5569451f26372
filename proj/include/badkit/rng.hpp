#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness helpers. std::mt19937 produces the same raw
// stream everywhere, but the standard distributions are implementation
// defined, so every draw the toolkit makes goes through the explicit
// conversions below. Same seed, same results, on any standard library.
namespace badkit::rng {

using Engine = std::mt19937;

// SplitMix64 finalizer; decorrelates (seed, stream) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  const std::uint64_t h = mix64(mix64(seed) ^ (stream + 0x9e3779b97f4a7c15ull));
  return Engine(static_cast<std::uint32_t>(h ^ (h >> 32)));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Engine& g) {
  const std::uint64_t hi = g() >> 5;  // 27 bits
  const std::uint64_t lo = g() >> 6;  // 26 bits
  return (static_cast<double>(hi) * 67108864.0 + static_cast<double>(lo)) *
         (1.0 / 9007199254740992.0);
}

inline double uniform_range(Engine& g, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(g);
}

// Unbiased integer draw in [0, n) via rejection sampling.
inline std::size_t uniform_index(Engine& g, std::size_t n) {
  const std::uint64_t span = 0x100000000ull;
  const std::uint64_t limit = span - span % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

inline bool bernoulli(Engine& g, double p) { return uniform_unit(g) < p; }

// Box-Muller, cosine branch only.
inline double normal(Engine& g) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  double u1 = uniform_unit(g);
  const double u2 = uniform_unit(g);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates with explicit draws (std::shuffle is implementation defined).
template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(g, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace badkit::rng
