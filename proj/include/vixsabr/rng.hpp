#pragma once

/// @file rng.hpp
/// @brief Per-path random streams.
///
/// Every path owns a xoshiro256** generator whose state is derived from
/// (seed, stream ids) through SplitMix64, so a path's draws depend only on its
/// index and never on which worker simulated it.

#include <cstdint>
#include <limits>
#include <random>

namespace vixsabr {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Mixes a seed with up to two stream identifiers into one 64-bit key.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                          std::uint64_t b = 0) noexcept {
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  s = k ^ (a * 0xD1B54A32D192ED03ULL);
  k = splitmix64(s);
  s = k ^ (b * 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(s);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t key) noexcept {
    for (auto& w : s_) w = splitmix64(key);
  }

  /// Raw state, for checking against reference output.
  static Xoshiro256 from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3) noexcept {
    Xoshiro256 g(0);
    g.s_[0] = s0;
    g.s_[1] = s1;
    g.s_[2] = s2;
    g.s_[3] = s3;
    return g;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Standard normal draws for one stream.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : engine_(stream_key(seed, a, b)) {}

  double normal() { return dist_(engine_); }

 private:
  Xoshiro256 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace vixsabr
