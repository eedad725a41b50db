#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/image.hpp"

namespace gencom {

enum class CodecId : std::uint8_t { lpf = 1, dct = 2 };
enum class ReconstructionMode : std::uint8_t { replicate = 0, bilinear = 1 };

struct LpfConfig {
  std::size_t block_size = 8;
  ReconstructionMode mode = ReconstructionMode::bilinear;
};

// Source-coded image plus the side information needed to decode it.
// `param` is the LPF block size or the DCT quality.
struct CompressedImage {
  CodecId codec = CodecId::lpf;
  std::uint8_t param = 1;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channels = 1;
  ReconstructionMode mode = ReconstructionMode::replicate;
  std::vector<std::uint8_t> payload;

  bool operator==(const CompressedImage&) const = default;
};

// Grid of per-block means, row-major with interleaved channels (same layout as Image).
struct BlockGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> values;

  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return values[(y * width + x) * channels + c];
  }
  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) { return values[(y * width + x) * channels + c]; }
  std::size_t cell_count() const noexcept { return values.size(); }

  bool operator==(const BlockGrid&) const = default;
};

constexpr std::size_t ceil_div(std::size_t a, std::size_t b) noexcept { return (a + b - 1) / b; }

// Integer mean with round-half-to-even.
constexpr std::uint8_t round_mean_half_even(std::uint64_t sum, std::uint64_t count) noexcept {
  std::uint64_t q = sum / count;
  const std::uint64_t r2 = 2 * (sum % count);
  if (r2 > count || (r2 == count && (q & 1u))) ++q;
  return static_cast<std::uint8_t>(q);
}

inline std::uint8_t clamp_round_u8(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

inline CompressedImage lpf_encode(const Image& img, const LpfConfig& cfg) {
  const std::size_t b = cfg.block_size;
  if (b < 1 || b > 255) throw ContractViolation("LPF block size must be in [1, 255]");
  const std::size_t gw = ceil_div(img.width, b);
  const std::size_t gh = ceil_div(img.height, b);
  const std::size_t ch = img.channels;
  CompressedImage out;
  out.codec = CodecId::lpf;
  out.param = static_cast<std::uint8_t>(b);
  out.width = static_cast<std::uint32_t>(img.width);
  out.height = static_cast<std::uint32_t>(img.height);
  out.channels = static_cast<std::uint8_t>(ch);
  out.mode = cfg.mode;
  out.payload.resize(gw * gh * ch);
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx)
      for (std::size_t c = 0; c < ch; ++c) {
        std::uint64_t sum = 0;
        for (std::size_t dy = 0; dy < b; ++dy) {
          const std::size_t y = std::min(gy * b + dy, img.height - 1);  // edge replication
          for (std::size_t dx = 0; dx < b; ++dx) {
            const std::size_t x = std::min(gx * b + dx, img.width - 1);
            sum += img.at(x, y, c);
          }
        }
        out.payload[(gy * gw + gx) * ch + c] = round_mean_half_even(sum, b * b);
      }
  return out;
}

inline std::size_t lpf_payload_size(std::size_t w, std::size_t h, std::size_t channels, std::size_t b) {
  return ceil_div(w, b) * ceil_div(h, b) * channels;
}

inline BlockGrid lpf_grid(const CompressedImage& ci) {
  if (ci.codec != CodecId::lpf) throw ContractViolation("not an LPF payload");
  if (ci.param == 0) throw FormatError("LPF block size is zero");
  BlockGrid g;
  g.width = ceil_div(ci.width, ci.param);
  g.height = ceil_div(ci.height, ci.param);
  g.channels = ci.channels;
  if (ci.payload.size() != g.width * g.height * g.channels)
    throw FormatError("LPF payload length " + std::to_string(ci.payload.size()) + " does not match header (" +
                      std::to_string(g.width * g.height * g.channels) + ")");
  g.values = ci.payload;
  return g;
}

inline Image upscale_replicate(const BlockGrid& g, std::size_t block_size, std::size_t out_w, std::size_t out_h) {
  Image img(out_w, out_h, g.channels);
  for (std::size_t y = 0; y < out_h; ++y)
    for (std::size_t x = 0; x < out_w; ++x)
      for (std::size_t c = 0; c < g.channels; ++c)
        img.at(x, y, c) = g.at(std::min(x / block_size, g.width - 1), std::min(y / block_size, g.height - 1), c);
  return img;
}

// Bilinear interpolation between block centres. Output pixel x samples grid
// coordinate (x + 0.5) / b - 0.5, clamped to the grid, so b = 1 is the identity.
inline Image upscale_bilinear(const BlockGrid& g, std::size_t block_size, std::size_t out_w, std::size_t out_h) {
  Image img(out_w, out_h, g.channels);
  const double inv_b = 1.0 / static_cast<double>(block_size);
  auto axis = [inv_b](std::size_t p, std::size_t n, std::size_t& i0, std::size_t& i1, double& t) {
    const double u = std::clamp((static_cast<double>(p) + 0.5) * inv_b - 0.5, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<std::size_t>(u);
    i1 = std::min(i0 + 1, n - 1);
    t = u - static_cast<double>(i0);
  };
  for (std::size_t y = 0; y < out_h; ++y) {
    std::size_t y0, y1;
    double ty;
    axis(y, g.height, y0, y1, ty);
    for (std::size_t x = 0; x < out_w; ++x) {
      std::size_t x0, x1;
      double tx;
      axis(x, g.width, x0, x1, tx);
      for (std::size_t c = 0; c < g.channels; ++c) {
        const double top = (1.0 - tx) * g.at(x0, y0, c) + tx * g.at(x1, y0, c);
        const double bot = (1.0 - tx) * g.at(x0, y1, c) + tx * g.at(x1, y1, c);
        img.at(x, y, c) = clamp_round_u8((1.0 - ty) * top + ty * bot);
      }
    }
  }
  return img;
}

inline Image lpf_reconstruct_grid(const BlockGrid& g, std::size_t block_size, std::size_t out_w, std::size_t out_h,
                                  ReconstructionMode mode) {
  return mode == ReconstructionMode::replicate ? upscale_replicate(g, block_size, out_w, out_h)
                                               : upscale_bilinear(g, block_size, out_w, out_h);
}

inline Image lpf_reconstruct(const CompressedImage& ci) {
  return lpf_reconstruct_grid(lpf_grid(ci), ci.param, ci.width, ci.height, ci.mode);
}

inline Image lpf_reconstruct(const CompressedImage& ci, ReconstructionMode mode) {
  return lpf_reconstruct_grid(lpf_grid(ci), ci.param, ci.width, ci.height, mode);
}

// Container layout (16-byte little-endian header, then payload):
//   [0..3]  magic "GCIM"
//   [4]     codec id (1 = LPF, 2 = DCT)
//   [5]     block size (LPF) or quality (DCT)
//   [6..9]  width  (u32 LE)
//   [10..13] height (u32 LE)
//   [14]    channels
//   [15]    reconstruction mode (LPF), 0 for DCT
inline constexpr std::size_t kContainerHeaderSize = 16;

inline std::vector<std::uint8_t> serialize(const CompressedImage& ci) {
  std::vector<std::uint8_t> out(kContainerHeaderSize);
  out[0] = 'G';
  out[1] = 'C';
  out[2] = 'I';
  out[3] = 'M';
  out[4] = static_cast<std::uint8_t>(ci.codec);
  out[5] = ci.param;
  for (int i = 0; i < 4; ++i) {
    out[6 + i] = static_cast<std::uint8_t>(ci.width >> (8 * i));
    out[10 + i] = static_cast<std::uint8_t>(ci.height >> (8 * i));
  }
  out[14] = ci.channels;
  out[15] = static_cast<std::uint8_t>(ci.mode);
  out.insert(out.end(), ci.payload.begin(), ci.payload.end());
  return out;
}

inline CompressedImage deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kContainerHeaderSize) throw FormatError("container shorter than its 16-byte header");
  if (bytes[0] != 'G' || bytes[1] != 'C' || bytes[2] != 'I' || bytes[3] != 'M')
    throw FormatError("bad container magic");
  CompressedImage ci;
  if (bytes[4] != 1 && bytes[4] != 2) throw FormatError("unknown codec id " + std::to_string(bytes[4]));
  ci.codec = static_cast<CodecId>(bytes[4]);
  ci.param = bytes[5];
  for (int i = 0; i < 4; ++i) {
    ci.width |= static_cast<std::uint32_t>(bytes[6 + i]) << (8 * i);
    ci.height |= static_cast<std::uint32_t>(bytes[10 + i]) << (8 * i);
  }
  ci.channels = bytes[14];
  if (ci.channels != 1 && ci.channels != 3) throw FormatError("channels must be 1 or 3");
  if (bytes[15] > 1) throw FormatError("unknown reconstruction mode");
  ci.mode = static_cast<ReconstructionMode>(bytes[15]);
  ci.payload.assign(bytes.begin() + kContainerHeaderSize, bytes.end());
  if (ci.codec == CodecId::lpf) {
    if (ci.param == 0) throw FormatError("LPF block size is zero");
    const std::size_t need = lpf_payload_size(ci.width, ci.height, ci.channels, ci.param);
    if (ci.payload.size() != need) throw FormatError("LPF payload length does not match header");
  }
  return ci;
}

}  // namespace gencom
