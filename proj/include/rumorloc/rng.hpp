#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rumorloc/errors.hpp"

namespace rumorloc {

// Finalizer of the splitmix64 generator. Used to derive independent
// sub-stream seeds from (base seed, stream index) pairs so that every
// trial/component gets its own reproducible stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream * 0x632be59bd9b4e019ULL + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

// Deterministic random source. All conversions from raw 64-bit output to
// doubles/integers are written out explicitly so results are identical
// across standard libraries and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_below: n must be positive");
    const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
    std::uint64_t r = engine_();
    while (r >= bound) r = engine_();
    return r % n;
  }

  // Box-Muller; consumes exactly two uniforms per call.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double exponential(double mean) {
    if (!(mean > 0.0)) throw ArgumentError("exponential: mean must be positive");
    return -mean * std::log(1.0 - uniform01());
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(v.size() - i));
      std::swap(v[i], v[j]);
    }
  }

  // First k entries of a random permutation of [0, n). Deterministic given
  // the engine state; used for sporadic masking.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    if (k > n) throw ArgumentError("sample_indices: k exceeds n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace rumorloc
