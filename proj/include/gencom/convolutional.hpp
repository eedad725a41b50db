#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gencom/bits.hpp"
#include "gencom/error.hpp"

namespace gencom {

// Rate-1/2, K = 7 feed-forward convolutional code with generators 171/133 (octal).
// The shift register holds the newest input in bit 0; each generator is applied
// as a tap mask over the 7 register bits. Blocks are zero-terminated with K-1
// flush bits, so the trellis starts and ends in state 0.
class ConvolutionalCode {
 public:
  static constexpr int kConstraint = 7;
  static constexpr int kMemory = kConstraint - 1;
  static constexpr int kStates = 1 << kMemory;
  static constexpr std::uint32_t kG1 = 0171;
  static constexpr std::uint32_t kG2 = 0133;

  static constexpr std::size_t coded_length(std::size_t message_bits) noexcept { return 2 * (message_bits + kMemory); }

  static BitVec encode(std::span<const std::uint8_t> bits) {
    BitVec out;
    out.reserve(coded_length(bits.size()));
    std::uint32_t sr = 0;
    auto push = [&](std::uint8_t u) {
      sr = ((sr << 1) | (u & 1u)) & 0x7Fu;
      out.push_back(static_cast<std::uint8_t>(std::popcount(sr & kG1) & 1));
      out.push_back(static_cast<std::uint8_t>(std::popcount(sr & kG2) & 1));
    };
    for (auto b : bits) push(b);
    for (int i = 0; i < kMemory; ++i) push(0);
    return out;
  }

  // Soft-decision Viterbi: branch cost is the negated correlation with the LLRs.
  static BitVec decode_soft(std::span<const double> llr, std::size_t message_bits) {
    check_length(llr.size(), message_bits);
    return viterbi(message_bits, [&](std::size_t step, int o1, int o2) {
      const double l1 = llr[2 * step], l2 = llr[2 * step + 1];
      return (o1 ? l1 : -l1) + (o2 ? l2 : -l2);
    });
  }

  // Hard-decision Viterbi with the Hamming branch metric.
  static BitVec decode_hard(std::span<const std::uint8_t> bits, std::size_t message_bits) {
    check_length(bits.size(), message_bits);
    return viterbi(message_bits, [&](std::size_t step, int o1, int o2) {
      return static_cast<double>(((bits[2 * step] & 1) != o1) + ((bits[2 * step + 1] & 1) != o2));
    });
  }

 private:
  static void check_length(std::size_t coded, std::size_t message_bits) {
    if (coded != coded_length(message_bits))
      throw ContractViolation("convolutional stream length does not match 2*(message+6)");
  }

  static const std::array<std::array<std::uint8_t, 2>, 2 * kStates>& branch_outputs() {
    static const auto table = [] {
      std::array<std::array<std::uint8_t, 2>, 2 * kStates> t{};
      for (std::uint32_t sr = 0; sr < 2 * kStates; ++sr) {
        t[sr][0] = static_cast<std::uint8_t>(std::popcount(sr & kG1) & 1);
        t[sr][1] = static_cast<std::uint8_t>(std::popcount(sr & kG2) & 1);
      }
      return t;
    }();
    return table;
  }

  template <typename BranchCost>
  static BitVec viterbi(std::size_t message_bits, BranchCost cost) {
    const std::size_t steps = message_bits + kMemory;
    const auto& outs = branch_outputs();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::array<double, kStates> metric{}, next{};
    metric.fill(kInf);
    metric[0] = 0.0;
    // decisions[t] bit s = which predecessor (oldest bit) won for state s at step t
    std::vector<std::uint64_t> decisions(steps, 0);
    for (std::size_t t = 0; t < steps; ++t) {
      next.fill(kInf);
      std::uint64_t dec = 0;
      for (std::uint32_t s = 0; s < kStates; ++s) {
        // state s = newest 6 inputs; predecessors differ in the bit shifted out
        const std::uint32_t u = s & 1u;
        const std::uint32_t base = s >> 1;
        const std::uint32_t p0 = base, p1 = base | (1u << (kMemory - 1));
        const std::uint32_t sr0 = (p0 << 1) | u, sr1 = (p1 << 1) | u;
        const double m0 = metric[p0] + cost(t, outs[sr0][0], outs[sr0][1]);
        const double m1 = metric[p1] + cost(t, outs[sr1][0], outs[sr1][1]);
        if (m1 < m0) {
          next[s] = m1;
          dec |= std::uint64_t{1} << s;
        } else {
          next[s] = m0;
        }
      }
      metric = next;
      decisions[t] = dec;
    }
    BitVec out(steps);
    std::uint32_t s = 0;  // terminated trellis ends in state 0
    for (std::size_t t = steps; t-- > 0;) {
      out[t] = static_cast<std::uint8_t>(s & 1u);
      const std::uint32_t top = static_cast<std::uint32_t>((decisions[t] >> s) & 1u);
      s = (s >> 1) | (top << (kMemory - 1));
    }
    out.resize(message_bits);
    return out;
  }
};

}  // namespace gencom
