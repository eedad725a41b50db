#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>
#include <utility>

namespace gencom {

// Counter-based SplitMix64. The i-th output of a stream is a pure function of
// (seed, i), so noise is reproducible from its index alone:
//   out(seed, i) = finalize(seed + (i + 1) * 0x9E3779B97F4A7C15)
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix_finalize(seed + (index + 1) * kGoldenGamma);
}

// Uniform on the open interval (0, 1) with 53 bits of resolution.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t index) noexcept {
  return (static_cast<double>(counter_u64(seed, index) >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller pair of independent N(0,1) samples drawn from uniforms 2k and 2k+1.
inline std::pair<double, double> counter_gaussian_pair(std::uint64_t seed, std::uint64_t k) noexcept {
  const double u1 = counter_uniform(seed, 2 * k);
  const double u2 = counter_uniform(seed, 2 * k + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// Derives an independent stream seed from a parent seed and a list of tags.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix_finalize(base ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t t : tags) h = splitmix_finalize(h ^ splitmix_finalize(t + kGoldenGamma));
  return h;
}

// 64-bit FNV-1a, used to turn identifiers into seed tags.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Sequential view over a counter stream for algorithms that consume draws in order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t start = 0) noexcept
      : seed_(seed), counter_(start) {}

  constexpr std::uint64_t next_u64() noexcept { return counter_u64(seed_, counter_++); }
  constexpr double uniform() noexcept { return counter_uniform(seed_, counter_++); }

  // Unbiased integer in [0, bound) by rejection; bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace gencom
