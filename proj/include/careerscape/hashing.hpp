#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace careerscape {

/// FNV-1a, 64-bit. Stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent substream: hash(master_seed, index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ (index * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the i-th draw depends only on (key, i).
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter));
  }
  /// Uniform in the open interval (0, 1).
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Standard normal via Box-Muller over counters (2i, 2i+1).
  double normal(std::uint64_t i) const noexcept {
    const double u1 = uniform(2 * i);
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace careerscape
