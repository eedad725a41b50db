#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gencom/bits.hpp"
#include "gencom/convolutional.hpp"
#include "gencom/error.hpp"
#include "gencom/ldpc.hpp"

namespace gencom {

inline constexpr std::uint64_t kDefaultLdpcSeed = 0x4C445043ULL;  // "LDPC"

struct CodeSpec {
  enum class Kind { uncoded, repetition, hamming74, convolutional, ldpc };
  Kind kind = Kind::uncoded;
  std::size_t repetition = 3;
  std::size_t ldpc_n = 1024;
  std::uint64_t ldpc_seed = kDefaultLdpcSeed;

  static CodeSpec uncoded() { return {}; }
  static CodeSpec repeat(std::size_t k) { return {Kind::repetition, k}; }
  static CodeSpec hamming() { return {Kind::hamming74}; }
  static CodeSpec conv() { return {Kind::convolutional}; }
  static CodeSpec ldpc(std::size_t n, std::uint64_t seed = kDefaultLdpcSeed) { return {Kind::ldpc, 3, n, seed}; }

  bool operator==(const CodeSpec&) const = default;
};

inline std::string to_string(CodeSpec::Kind k) {
  switch (k) {
    case CodeSpec::Kind::uncoded: return "uncoded";
    case CodeSpec::Kind::repetition: return "repetition";
    case CodeSpec::Kind::hamming74: return "hamming74";
    case CodeSpec::Kind::convolutional: return "convolutional";
    case CodeSpec::Kind::ldpc: return "ldpc";
  }
  return "?";
}

// Systematic Hamming(7,4): codeword = d0 d1 d2 d3 p0 p1 p2 with
// p0 = d0^d1^d3, p1 = d0^d2^d3, p2 = d1^d2^d3.
namespace hamming74 {

inline std::array<std::uint8_t, 7> encode_block(std::span<const std::uint8_t, 4> d) {
  return {d[0], d[1], d[2], d[3], static_cast<std::uint8_t>(d[0] ^ d[1] ^ d[3]),
          static_cast<std::uint8_t>(d[0] ^ d[2] ^ d[3]), static_cast<std::uint8_t>(d[1] ^ d[2] ^ d[3])};
}

// Single-error correction via syndrome lookup.
inline std::array<std::uint8_t, 4> decode_block(std::span<const std::uint8_t, 7> r) {
  // syndrome bit i set when parity equation i fails; value -> erroneous position
  static constexpr std::array<int, 8> kPosition = {-1, 4, 5, 0, 6, 1, 2, 3};
  const int s0 = r[0] ^ r[1] ^ r[3] ^ r[4];
  const int s1 = r[0] ^ r[2] ^ r[3] ^ r[5];
  const int s2 = r[1] ^ r[2] ^ r[3] ^ r[6];
  std::array<std::uint8_t, 7> c{};
  for (int i = 0; i < 7; ++i) c[i] = r[i] & 1u;
  const int pos = kPosition[s0 | (s1 << 1) | (s2 << 2)];
  if (pos >= 0) c[pos] ^= 1u;
  return {c[0], c[1], c[2], c[3]};
}

}  // namespace hamming74

// Shared, immutable LDPC instances keyed by (N, seed).
inline std::shared_ptr<const LdpcCode> ldpc_instance(std::size_t n, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::uint64_t>, std::shared_ptr<const LdpcCode>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, seed}];
  if (!slot) slot = std::make_shared<const LdpcCode>(n, seed);
  return slot;
}

// Encoder/decoder pair for one CodeSpec. Messages that are not a multiple of
// the code's block granularity are zero-padded; the receiver knows the message
// length out of band and drops the padding.
class ChannelCode {
 public:
  explicit ChannelCode(const CodeSpec& spec) : spec_(spec) {
    switch (spec.kind) {
      case CodeSpec::Kind::repetition:
        if (spec.repetition < 1) throw ContractViolation("repetition factor must be >= 1");
        break;
      case CodeSpec::Kind::ldpc:
        ldpc_ = ldpc_instance(spec.ldpc_n, spec.ldpc_seed);
        break;
      default:
        break;
    }
  }

  const CodeSpec& spec() const noexcept { return spec_; }
  const LdpcCode* ldpc() const noexcept { return ldpc_.get(); }

  double rate() const noexcept {
    switch (spec_.kind) {
      case CodeSpec::Kind::uncoded: return 1.0;
      case CodeSpec::Kind::repetition: return 1.0 / static_cast<double>(spec_.repetition);
      case CodeSpec::Kind::hamming74: return 4.0 / 7.0;
      case CodeSpec::Kind::convolutional: return 0.5;
      case CodeSpec::Kind::ldpc: return ldpc_->rate();
    }
    return 1.0;
  }

  std::size_t coded_length(std::size_t message_bits) const {
    switch (spec_.kind) {
      case CodeSpec::Kind::uncoded: return message_bits;
      case CodeSpec::Kind::repetition: return message_bits * spec_.repetition;
      case CodeSpec::Kind::hamming74: return 7 * ((message_bits + 3) / 4);
      case CodeSpec::Kind::convolutional: return ConvolutionalCode::coded_length(message_bits);
      case CodeSpec::Kind::ldpc: return ldpc_->n() * ((message_bits + ldpc_->k() - 1) / ldpc_->k());
    }
    return message_bits;
  }

  BitVec encode(std::span<const std::uint8_t> msg) const {
    BitVec out;
    out.reserve(coded_length(msg.size()));
    switch (spec_.kind) {
      case CodeSpec::Kind::uncoded:
        out.assign(msg.begin(), msg.end());
        break;
      case CodeSpec::Kind::repetition:
        for (auto b : msg) out.insert(out.end(), spec_.repetition, b);
        break;
      case CodeSpec::Kind::hamming74: {
        const auto padded = pad(msg, 4);
        for (std::size_t i = 0; i < padded.size(); i += 4) {
          const auto cw = hamming74::encode_block(std::span<const std::uint8_t, 4>(padded.data() + i, 4));
          out.insert(out.end(), cw.begin(), cw.end());
        }
        break;
      }
      case CodeSpec::Kind::convolutional:
        out = ConvolutionalCode::encode(msg);
        break;
      case CodeSpec::Kind::ldpc: {
        const std::size_t k = ldpc_->k();
        const auto padded = pad(msg, k);
        for (std::size_t i = 0; i < padded.size(); i += k) {
          const auto cw = ldpc_->encode(std::span<const std::uint8_t>(padded.data() + i, k));
          out.insert(out.end(), cw.begin(), cw.end());
        }
        break;
      }
    }
    return out;
  }

  // Soft-input decoding. Repetition sums LLRs; Hamming decodes the sign
  // decisions by syndrome; convolutional runs soft Viterbi; LDPC runs min-sum.
  BitVec decode(std::span<const double> llr, std::size_t message_bits, const MinSumOptions& opt = {}) const {
    check(llr.size(), message_bits);
    BitVec out;
    switch (spec_.kind) {
      case CodeSpec::Kind::uncoded:
        out = hard_decisions(llr);
        break;
      case CodeSpec::Kind::repetition: {
        const std::size_t k = spec_.repetition;
        out.resize(message_bits);
        for (std::size_t i = 0; i < message_bits; ++i) {
          double s = 0;
          for (std::size_t j = 0; j < k; ++j) s += llr[i * k + j];
          out[i] = s < 0.0 ? 1 : 0;
        }
        break;
      }
      case CodeSpec::Kind::hamming74:
        return decode_hard(hard_decisions(llr), message_bits);
      case CodeSpec::Kind::convolutional:
        out = ConvolutionalCode::decode_soft(llr, message_bits);
        break;
      case CodeSpec::Kind::ldpc: {
        const std::size_t n = ldpc_->n();
        for (std::size_t i = 0; i < llr.size(); i += n) {
          const auto res = ldpc_->decode(llr.subspan(i, n), opt);
          const auto info = ldpc_->extract_info(res.codeword);
          out.insert(out.end(), info.begin(), info.end());
        }
        break;
      }
    }
    out.resize(message_bits);
    return out;
  }

  // Hard-input decoding: majority for repetition (ties decode to 0), syndrome
  // for Hamming, Hamming-metric Viterbi, and min-sum on unit-magnitude LLRs.
  BitVec decode_hard(std::span<const std::uint8_t> bits, std::size_t message_bits) const {
    check(bits.size(), message_bits);
    BitVec out;
    switch (spec_.kind) {
      case CodeSpec::Kind::uncoded:
        out.assign(bits.begin(), bits.end());
        break;
      case CodeSpec::Kind::repetition: {
        const std::size_t k = spec_.repetition;
        out.resize(message_bits);
        for (std::size_t i = 0; i < message_bits; ++i) {
          std::size_t ones = 0;
          for (std::size_t j = 0; j < k; ++j) ones += bits[i * k + j] & 1u;
          out[i] = 2 * ones > k ? 1 : 0;
        }
        break;
      }
      case CodeSpec::Kind::hamming74:
        for (std::size_t i = 0; i < bits.size(); i += 7) {
          const auto d = hamming74::decode_block(std::span<const std::uint8_t, 7>(bits.data() + i, 7));
          out.insert(out.end(), d.begin(), d.end());
        }
        break;
      case CodeSpec::Kind::convolutional:
        out = ConvolutionalCode::decode_hard(bits, message_bits);
        break;
      case CodeSpec::Kind::ldpc:
        return decode(bits_to_llr(bits), message_bits);
    }
    out.resize(message_bits);
    return out;
  }

 private:
  static BitVec pad(std::span<const std::uint8_t> msg, std::size_t granularity) {
    BitVec padded(msg.begin(), msg.end());
    padded.resize(((msg.size() + granularity - 1) / granularity) * granularity, 0);
    return padded;
  }

  void check(std::size_t coded, std::size_t message_bits) const {
    if (coded != coded_length(message_bits))
      throw ContractViolation(to_string(spec_.kind) + ": coded length " + std::to_string(coded) +
                              " incompatible with message length " + std::to_string(message_bits));
  }

  CodeSpec spec_;
  std::shared_ptr<const LdpcCode> ldpc_;
};

}  // namespace gencom
