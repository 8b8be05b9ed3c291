#pragma once

// Deterministic random number generation.
//
// Every stochastic routine in the library draws from marc::Rng, a xoshiro256**
// generator seeded through splitmix64. Both algorithms are fixed published
// constants, so a given seed produces the same stream on every platform and
// in any reimplementation that follows the same recipe (see README for the
// exact constants). std::mt19937 plus <random> distributions are deliberately
// not used: the standard leaves distribution algorithms implementation-defined.
//
// Independent named streams are derived from one master seed with
// derive_stream(seed, label); per-item substreams with derive_stream(seed, index).

#include <cstdint>
#include <cstring>
#include <cmath>
#include <numbers>
#include <string_view>

namespace marc {

namespace detail {

// splitmix64 output function (Steele, Lea, Flood; public domain reference constants).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// FNV-1a over a byte string; used only to fold stream labels into a seed.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

// Child seed for a named stream. Stable, documented recipe:
//   child = splitmix64_output(master_seed XOR fnv1a64(label))
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view label) {
  std::uint64_t s = seed ^ detail::fnv1a64(label.data(), label.size());
  return detail::splitmix64(s);
}

// Child seed for an indexed substream; the index is folded as 8 little-endian bytes.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(index >> (8 * i));
  std::uint64_t s = seed ^ detail::fnv1a64(bytes, sizeof(bytes));
  return detail::splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // State expansion per the xoshiro authors' recommendation.
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  // xoshiro256** next step.
  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive. Rejection sampling keeps the
  // result exactly uniform and the stream reproducible.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t bound = n == 0 ? 0 : (0ULL - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t u = next_u64();
      if (u >= bound) return u % n;
    }
  }

  // Standard normal via Box-Muller (cosine branch only; consumes exactly two
  // uniforms per call, no cached second value).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1-u1 in (0,1], log finite
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t s_[4];
};

}  // namespace marc
