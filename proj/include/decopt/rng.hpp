// Seedable random number generation with fixed, documented algorithms.
//
// Every random draw in this library goes through this header so that fixtures
// are bit-identical across platforms and standard-library versions:
//   - engine: std::mt19937_64 (the algorithm is pinned by the C++ standard)
//   - uniform in [0,1): top 53 bits of the engine output, (x >> 11) * 2^-53
//   - standard normal: Box-Muller on two fresh uniforms (no cached spare)
//   - sub-stream seeds: splitmix64 of (master ^ stream-index constant)
// std::uniform_real_distribution / std::normal_distribution are deliberately
// not used: their output is implementation-defined.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace decopt {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sub-stream seed: components of one experiment draw from
// disjoint streams derived from a single master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

}  // namespace decopt
