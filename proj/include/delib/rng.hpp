#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, index), so results never depend on iteration order
// or on how work is split across threads.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace delib::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Stable 64-bit hash of a string (FNV-1a, then mixed).
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

/// Sub-seed for a named stream (e.g. "tau/treatment") under a master seed.
constexpr std::uint64_t derive(std::uint64_t seed, std::string_view tag) noexcept {
  return combine(seed, hash_string(tag));
}

class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    return combine(seed_, index);
  }

  /// Uniform in the open interval (0, 1).
  constexpr double uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0. Multiply-shift reduction.
  std::uint64_t below(std::uint64_t index, std::uint64_t bound) const noexcept {
    const unsigned __int128 wide = static_cast<unsigned __int128>(bits(index)) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Standard normal via Box-Muller on draws 2*index and 2*index+1.
  double normal(std::uint64_t index) const noexcept {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace delib::rng
