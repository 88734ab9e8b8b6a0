#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace osp::rng {

// CounterHash64: every draw is a pure function of (seed, lane, counter), so a
// stream can be regenerated round by round in any order and on any platform.
//
//   mix(z):  z += 0x9E3779B97F4A7C15
//            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//            return z ^ (z >> 31)
//   bits(seed, lane, counter) = mix(mix(seed + G (lane + 1)) + G (counter + 1))
//   uniform = (bits >> 11) * 2^-53, in [0, 1)
//
// with G = 0x9E3779B97F4A7C15 and all arithmetic modulo 2^64.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t lane, std::uint64_t counter) {
  return mix(mix(seed + kGolden * (lane + 1)) + kGolden * (counter + 1));
}

constexpr double uniform(std::uint64_t seed, std::uint64_t lane, std::uint64_t counter) {
  return static_cast<double>(bits(seed, lane, counter) >> 11) * 0x1.0p-53;
}

// Box-Muller from counters 2c and 2c+1.
inline double normal(std::uint64_t seed, std::uint64_t lane, std::uint64_t counter) {
  const double u1 = 1.0 - uniform(seed, lane, 2 * counter);
  const double u2 = uniform(seed, lane, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Lanes used by the stream generator.
inline constexpr std::uint64_t kLaneInput = 1;
inline constexpr std::uint64_t kLaneLabel = 2;
inline constexpr std::uint64_t kLaneAnchor = 3;
inline constexpr std::uint64_t kLaneTable = 4;

}  // namespace osp::rng
