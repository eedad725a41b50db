#pragma once

#include <cstdint>
#include <span>

#include "gencom/bits.hpp"
#include "gencom/error.hpp"

namespace gencom {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
inline std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bits) noexcept {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bits) {
    const bool top = ((crc >> 15) & 1u) != (b & 1u);
    crc = static_cast<std::uint16_t>(crc << 1);
    if (top) crc ^= 0x1021;
  }
  return crc;
}

inline BitVec crc_append(std::span<const std::uint8_t> message) {
  BitVec out(message.begin(), message.end());
  const std::uint16_t crc = crc16_ccitt_false(message);
  for (int i = 15; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((crc >> i) & 1u));
  return out;
}

// With no reflection and no output xor, a clean message+check leaves a zero register.
inline bool crc_check(std::span<const std::uint8_t> framed) {
  if (framed.size() < 16) throw ContractViolation("CRC check needs at least 16 bits");
  return crc16_ccitt_false(framed.first(framed.size() - 16)) ==
         [&] {
           std::uint16_t v = 0;
           for (std::size_t i = framed.size() - 16; i < framed.size(); ++i)
             v = static_cast<std::uint16_t>((v << 1) | (framed[i] & 1u));
           return v;
         }();
}

inline BitVec crc_strip(std::span<const std::uint8_t> framed) {
  if (framed.size() < 16) throw ContractViolation("CRC strip needs at least 16 bits");
  return BitVec(framed.begin(), framed.end() - 16);
}

}  // namespace gencom
