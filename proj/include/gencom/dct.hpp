#pragma once

// JPEG-like baseline codec: 8x8 DCT-II, scaled quantization table, zigzag scan,
// (run, size) symbols with fixed canonical prefix codes. Not JFIF-compatible.
//
// Fixed code lengths (canonical assignment, shorter codes first, ties by symbol value):
//   DC size category s:     len = 2 for s in {0, 1}, s + 1 otherwise      (s <= 15)
//   AC EOB (0,0):           len = 2
//   AC ZRL (15,0):          len = 18
//   AC (run r, size s>=1):  len = 2 + r + s
// Both codes are incomplete, so some bit patterns are invalid and surface as DecodeFailure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/image.hpp"
#include "gencom/lpf.hpp"

namespace gencom {

struct DctConfig {
  int quality = 75;
};

namespace dct_detail {

inline constexpr std::array<int, 64> kBaseTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// zigzag index -> natural (row-major) index
inline constexpr std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline constexpr int kEob = 0x00;
inline constexpr int kZrl = 0xF0;

struct PrefixCode {
  std::array<std::uint64_t, 256> code{};
  std::array<std::uint8_t, 256> length{};  // 0 = symbol not in alphabet
  // canonical decoding tables
  std::array<std::uint64_t, 33> first_code{};
  std::array<std::uint32_t, 33> count{};
  std::array<std::uint32_t, 33> first_index{};
  std::vector<int> sorted_symbols;
  int max_length = 0;
};

inline PrefixCode build_canonical(const std::array<std::uint8_t, 256>& lengths) {
  PrefixCode pc;
  pc.length = lengths;
  for (int len = 1; len <= 32; ++len)
    for (int s = 0; s < 256; ++s)
      if (lengths[s] == len) {
        pc.sorted_symbols.push_back(s);
        ++pc.count[len];
        pc.max_length = len;
      }
  std::uint64_t code = 0;
  std::uint32_t index = 0;
  for (int len = 1; len <= 32; ++len) {
    pc.first_code[len] = code;
    pc.first_index[len] = index;
    for (std::uint32_t k = 0; k < pc.count[len]; ++k) pc.code[pc.sorted_symbols[index + k]] = code + k;
    code = (code + pc.count[len]) << 1;
    index += pc.count[len];
  }
  return pc;
}

inline const PrefixCode& dc_code() {
  static const PrefixCode pc = [] {
    std::array<std::uint8_t, 256> len{};
    for (int s = 0; s <= 15; ++s) len[s] = static_cast<std::uint8_t>(s < 2 ? 2 : s + 1);
    return build_canonical(len);
  }();
  return pc;
}

inline const PrefixCode& ac_code() {
  static const PrefixCode pc = [] {
    std::array<std::uint8_t, 256> len{};
    len[kEob] = 2;
    len[kZrl] = 18;
    for (int r = 0; r <= 15; ++r)
      for (int s = 1; s <= 15; ++s) len[(r << 4) | s] = static_cast<std::uint8_t>(2 + r + s);
    return build_canonical(len);
  }();
  return pc;
}

class BitWriter {
 public:
  void put(std::uint64_t value, int nbits) {
    for (int i = nbits - 1; i >= 0; --i) {
      cur_ = static_cast<std::uint8_t>((cur_ << 1) | ((value >> i) & 1u));
      if (++fill_ == 8) {
        bytes_.push_back(cur_);
        cur_ = 0;
        fill_ = 0;
      }
    }
  }
  std::vector<std::uint8_t> finish() {
    if (fill_ > 0) bytes_.push_back(static_cast<std::uint8_t>(cur_ << (8 - fill_)));
    fill_ = 0;
    cur_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint8_t cur_ = 0;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  int bit() {
    if (pos_ >= bytes_.size() * 8) throw DecodeFailure("entropy stream exhausted");
    const int b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
    ++pos_;
    return b;
  }
  std::uint64_t bits(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint64_t>(bit());
    return v;
  }
  std::size_t position() const noexcept { return pos_; }
  std::size_t size_bits() const noexcept { return bytes_.size() * 8; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline int decode_symbol(BitReader& br, const PrefixCode& pc) {
  std::uint64_t code = 0;
  for (int len = 1; len <= pc.max_length; ++len) {
    code = (code << 1) | static_cast<std::uint64_t>(br.bit());
    if (pc.count[len] && code >= pc.first_code[len] && code - pc.first_code[len] < pc.count[len])
      return pc.sorted_symbols[pc.first_index[len] + (code - pc.first_code[len])];
  }
  throw DecodeFailure("invalid prefix code");
}

inline int magnitude_category(int v) {
  unsigned a = static_cast<unsigned>(v < 0 ? -v : v);
  int s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

inline void put_magnitude(BitWriter& bw, int v, int s) {
  if (s == 0) return;
  const int bits = v >= 0 ? v : v + (1 << s) - 1;
  bw.put(static_cast<std::uint64_t>(bits), s);
}

inline int get_magnitude(BitReader& br, int s) {
  if (s == 0) return 0;
  const int bits = static_cast<int>(br.bits(s));
  return bits >= (1 << (s - 1)) ? bits : bits - (1 << s) + 1;
}

inline const std::array<double, 64>& cos_table() {
  static const std::array<double, 64> t = [] {
    std::array<double, 64> c{};
    for (int u = 0; u < 8; ++u)
      for (int x = 0; x < 8; ++x) {
        const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
        c[u * 8 + x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    return c;
  }();
  return t;
}

// Orthonormal separable 8x8 DCT-II; in/out row-major.
inline std::array<double, 64> forward_dct(const std::array<double, 64>& in) {
  const auto& c = cos_table();
  std::array<double, 64> tmp{}, out{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += c[u * 8 + x] * in[y * 8 + x];
      tmp[y * 8 + u] = s;
    }
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += c[v * 8 + y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  return out;
}

inline std::array<double, 64> inverse_dct(const std::array<double, 64>& in) {
  const auto& c = cos_table();
  std::array<double, 64> tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += c[u * 8 + x] * in[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += c[v * 8 + y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  return out;
}

}  // namespace dct_detail

// Quantizer steps in natural order, scaled by quality like the IJG reference encoder.
inline std::array<int, 64> dct_quant_table(int quality) {
  if (quality < 1 || quality > 100) throw ContractViolation("DCT quality must be in [1, 100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> t{};
  for (int i = 0; i < 64; ++i) t[i] = std::clamp((dct_detail::kBaseTable[i] * scale + 50) / 100, 1, 255);
  return t;
}

// Quantized coefficients, natural order, one 64-entry block per 8x8 tile.
// Blocks are ordered by channel plane, then raster within the plane.
using CoefficientBlocks = std::vector<std::array<int, 64>>;

inline CoefficientBlocks dct_quantized_coefficients(const Image& img, int quality) {
  const auto q = dct_quant_table(quality);
  const std::size_t bw = ceil_div(img.width, 8), bh = ceil_div(img.height, 8);
  CoefficientBlocks blocks;
  blocks.reserve(bw * bh * img.channels);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t by = 0; by < bh; ++by)
      for (std::size_t bx = 0; bx < bw; ++bx) {
        std::array<double, 64> px{};
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const std::size_t sx = std::min(bx * 8 + static_cast<std::size_t>(x), img.width - 1);
            const std::size_t sy = std::min(by * 8 + static_cast<std::size_t>(y), img.height - 1);
            px[y * 8 + x] = static_cast<double>(img.at(sx, sy, c)) - 128.0;
          }
        const auto f = dct_detail::forward_dct(px);
        std::array<int, 64> out{};
        for (int i = 0; i < 64; ++i) out[i] = static_cast<int>(std::nearbyint(f[i] / q[i]));
        blocks.push_back(out);
      }
  return blocks;
}

inline CompressedImage dct_encode(const Image& img, const DctConfig& cfg) {
  using namespace dct_detail;
  const auto blocks = dct_quantized_coefficients(img, cfg.quality);
  const auto& dc = dc_code();
  const auto& ac = ac_code();
  const std::size_t per_plane = ceil_div(img.width, 8) * ceil_div(img.height, 8);
  BitWriter bw;
  int pred = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k % per_plane == 0) pred = 0;
    const auto& b = blocks[k];
    const int diff = b[0] - pred;
    pred = b[0];
    const int s = magnitude_category(diff);
    bw.put(dc.code[s], dc.length[s]);
    put_magnitude(bw, diff, s);
    int run = 0;
    for (int z = 1; z < 64; ++z) {
      const int v = b[kZigzag[z]];
      if (v == 0) {
        ++run;
        continue;
      }
      while (run > 15) {
        bw.put(ac.code[kZrl], ac.length[kZrl]);
        run -= 16;
      }
      const int sz = magnitude_category(v);
      const int sym = (run << 4) | sz;
      bw.put(ac.code[sym], ac.length[sym]);
      put_magnitude(bw, v, sz);
      run = 0;
    }
    if (run > 0) bw.put(ac.code[kEob], ac.length[kEob]);
  }
  CompressedImage out;
  out.codec = CodecId::dct;
  out.param = static_cast<std::uint8_t>(cfg.quality);
  out.width = static_cast<std::uint32_t>(img.width);
  out.height = static_cast<std::uint32_t>(img.height);
  out.channels = static_cast<std::uint8_t>(img.channels);
  out.mode = ReconstructionMode::replicate;
  out.payload = bw.finish();
  return out;
}

// Throws DecodeFailure on any inconsistency in the entropy stream.
inline Image dct_decode(const CompressedImage& ci) {
  using namespace dct_detail;
  if (ci.codec != CodecId::dct) throw ContractViolation("not a DCT payload");
  if (ci.param < 1 || ci.param > 100) throw DecodeFailure("quality out of range");
  if (ci.width == 0 || ci.height == 0 || (ci.channels != 1 && ci.channels != 3))
    throw DecodeFailure("bad dimensions");
  const auto q = dct_quant_table(ci.param);
  const std::size_t bw = ceil_div(ci.width, 8), bh = ceil_div(ci.height, 8);
  const auto& dc = dc_code();
  const auto& ac = ac_code();
  BitReader br(ci.payload);
  Image img(ci.width, ci.height, ci.channels);
  for (std::size_t c = 0; c < ci.channels; ++c) {
    int pred = 0;
    for (std::size_t by = 0; by < bh; ++by)
      for (std::size_t bx = 0; bx < bw; ++bx) {
        std::array<int, 64> coef{};
        const int s = decode_symbol(br, dc);
        pred += get_magnitude(br, s);
        coef[0] = pred;
        int z = 1;
        while (z < 64) {
          const int sym = decode_symbol(br, ac);
          if (sym == kEob) break;
          if (sym == kZrl) {
            z += 16;
            if (z > 63) throw DecodeFailure("zero run past end of block");
            continue;
          }
          z += sym >> 4;
          if (z > 63) throw DecodeFailure("coefficient index past end of block");
          coef[kZigzag[z]] = get_magnitude(br, sym & 15);
          ++z;
        }
        std::array<double, 64> f{};
        for (int i = 0; i < 64; ++i) f[i] = static_cast<double>(coef[i]) * q[i];
        const auto px = inverse_dct(f);
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const std::size_t ox = bx * 8 + static_cast<std::size_t>(x), oy = by * 8 + static_cast<std::size_t>(y);
            if (ox < ci.width && oy < ci.height) img.at(ox, oy, c) = clamp_round_u8(px[y * 8 + x] + 128.0);
          }
      }
  }
  const std::size_t rest = br.size_bits() - br.position();
  if (rest >= 8) throw DecodeFailure("trailing data after last block");
  while (br.position() < br.size_bits())
    if (br.bit() != 0) throw DecodeFailure("non-zero padding bits");
  return img;
}

}  // namespace gencom
