#pragma once

// Seeded random streams. The standard engines are specified bit-for-bit but
// the standard distributions are not, so the few variates we need are drawn
// here directly from the engine output.

#include <cmath>
#include <cstdint>
#include <random>

namespace bayesbin {

using Engine = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream purposes, so that e.g. chain 0 and prediction row 0 never share a stream.
enum class StreamTag : std::uint64_t {
  Subsample = 1,
  Balance = 2,
  Trim = 3,
  Holdout = 4,
  Chain = 5,
  Predict = 6,
  Synthetic = 7,
};

/// Seed of substream `index` under `tag`: mix64(mix64(seed ^ tag) + index).
/// Depends only on its arguments, never on scheduling.
constexpr std::uint64_t substream_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
  return mix64(mix64(seed ^ (static_cast<std::uint64_t>(tag) * 0xd1b54a32d192ed03ULL)) + index);
}

inline Engine make_engine(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
  return Engine(substream_seed(seed, tag, index));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - Engine::max() % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % n;
}

/// Standard normal by the Marsaglia polar method (second variate discarded).
inline double standard_normal(Engine& eng) {
  double u, v, s;
  do {
    u = 2.0 * uniform01(eng) - 1.0;
    v = 2.0 * uniform01(eng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace bayesbin
