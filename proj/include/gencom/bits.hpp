#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gencom {

// One bit per element, values 0 or 1.
using BitVec = std::vector<std::uint8_t>;
// Per-bit log-likelihood ratios, log P(b=0)/P(b=1); positive favours 0.
using LlrVec = std::vector<double>;

// MSB-first unpacking of a byte sequence.
inline BitVec unpack_bytes(std::span<const std::uint8_t> bytes) {
  BitVec bits(bytes.size() * 8);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    for (int j = 0; j < 8; ++j) bits[i * 8 + j] = (bytes[i] >> (7 - j)) & 1u;
  return bits;
}

// MSB-first packing; a trailing partial byte is zero-filled.
inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1u) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return bytes;
}

inline BitVec hard_decisions(std::span<const double> llr) {
  BitVec bits(llr.size());
  for (std::size_t i = 0; i < llr.size(); ++i) bits[i] = llr[i] < 0.0 ? 1 : 0;
  return bits;
}

// Maps hard bits to unit-magnitude LLRs so soft decoders accept hard input.
inline LlrVec bits_to_llr(std::span<const std::uint8_t> bits, double magnitude = 1.0) {
  LlrVec llr(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) llr[i] = bits[i] ? -magnitude : magnitude;
  return llr;
}

inline std::size_t count_bit_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) n += (a[i] ^ b[i]) & 1u;
  return n;
}

}  // namespace gencom
