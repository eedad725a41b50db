#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/rng.hpp"

namespace gencom {

struct InterleaverSpec {
  enum class Kind { none, block, random };
  Kind kind = Kind::none;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;

  static InterleaverSpec identity() { return {}; }
  static InterleaverSpec block(std::size_t r, std::size_t c) { return {Kind::block, r, c, 0}; }
  static InterleaverSpec random(std::uint64_t s) { return {Kind::random, 0, 0, s}; }

  bool operator==(const InterleaverSpec&) const = default;
};

// perm[k] = input index emitted at output position k.
inline std::vector<std::size_t> interleaver_permutation(const InterleaverSpec& spec, std::size_t len) {
  std::vector<std::size_t> perm(len);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  switch (spec.kind) {
    case InterleaverSpec::Kind::none:
      break;
    case InterleaverSpec::Kind::block: {
      if (spec.rows * spec.cols != len)
        throw ContractViolation("block interleaver " + std::to_string(spec.rows) + "x" + std::to_string(spec.cols) +
                                " does not match stream length " + std::to_string(len));
      // written row-wise, read column-wise
      std::size_t k = 0;
      for (std::size_t c = 0; c < spec.cols; ++c)
        for (std::size_t r = 0; r < spec.rows; ++r) perm[k++] = r * spec.cols + c;
      break;
    }
    case InterleaverSpec::Kind::random: {
      // Fisher-Yates driven by the counter-based stream of the spec seed.
      CounterRng rng(spec.seed);
      for (std::size_t i = len; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
      break;
    }
  }
  return perm;
}

template <typename T>
std::vector<T> interleave(std::span<const T> in, const InterleaverSpec& spec) {
  if (in.empty()) throw ContractViolation("cannot interleave an empty stream");
  const auto perm = interleaver_permutation(spec, in.size());
  std::vector<T> out(in.size());
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[perm[k]];
  return out;
}

template <typename T>
std::vector<T> deinterleave(std::span<const T> in, const InterleaverSpec& spec) {
  if (in.empty()) throw ContractViolation("cannot deinterleave an empty stream");
  const auto perm = interleaver_permutation(spec, in.size());
  std::vector<T> out(in.size());
  for (std::size_t k = 0; k < in.size(); ++k) out[perm[k]] = in[k];
  return out;
}

template <typename T>
std::vector<T> interleave(const std::vector<T>& in, const InterleaverSpec& spec) {
  return interleave(std::span<const T>(in), spec);
}

template <typename T>
std::vector<T> deinterleave(const std::vector<T>& in, const InterleaverSpec& spec) {
  return deinterleave(std::span<const T>(in), spec);
}

}  // namespace gencom
