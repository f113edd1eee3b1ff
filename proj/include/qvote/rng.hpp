#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qvote {

// Deterministic 64-bit generator (splitmix64). The standard library engines
// are portable but the distributions are not; everything random in this
// project goes through this class so that transcripts are byte-identical
// across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in {0, ..., bound-1}; bound > 0. Rejection sampling over a
  // power-of-two mask keeps the draw unbiased.
  std::uint64_t uniform_int(std::uint64_t bound) {
    std::uint64_t mask = ~0ULL;
    if (bound > 1) {
      mask = bound - 1;
      mask |= mask >> 1;
      mask |= mask >> 2;
      mask |= mask >> 4;
      mask |= mask >> 8;
      mask |= mask >> 16;
      mask |= mask >> 32;
    } else {
      return 0;
    }
    std::uint64_t v;
    do {
      v = next_u64() & mask;
    } while (v >= bound);
    return v;
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  // Box-Muller; draws two uniforms per call.
  double normal(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  // Exponential waiting time for a Poisson process of the given rate.
  double exponential(double rate) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return -std::log(u) / rate;
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Per-component seed derivation: a component label plus up to two indices
// hashed together with the master seed. Documented so that runs can be
// replayed piecewise (e.g. the basis choice of agent 3 in round 17).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = detail::fnv1a(label);
  h = detail::mix(h ^ (master + 0x9E3779B97F4A7C15ULL));
  h = detail::mix(h ^ (a * 0xD1342543DE82EF95ULL + 1));
  h = detail::mix(h ^ (b * 0xAF251AF3B0F025B5ULL + 1));
  return h;
}

}  // namespace qvote
