#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/image.hpp"
#include "gencom/lpf.hpp"

namespace gencom {

// Per-cell "suspected corrupted" flags over a block-mean grid (same layout as
// BlockGrid::values, channels interleaved) and the flagged fraction f.
struct ErrorMask {
  std::vector<std::uint8_t> flags;
  std::size_t flagged = 0;
  double fraction = 0.0;
};

namespace semdec_detail {

// Median of a small buffer; even counts average the two middle values.
inline double median(std::vector<int>& v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const int hi = v[n / 2];
  if (n % 2) return hi;
  const int lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

template <typename Fn>
void for_each_neighbor(const BlockGrid& g, std::size_t x, std::size_t y, Fn fn) {
  const std::size_t x0 = x ? x - 1 : 0, y0 = y ? y - 1 : 0;
  const std::size_t x1 = std::min(x + 1, g.width - 1), y1 = std::min(y + 1, g.height - 1);
  for (std::size_t ny = y0; ny <= y1; ++ny)
    for (std::size_t nx = x0; nx <= x1; ++nx)
      if (nx != x || ny != y) fn(nx, ny);
}

}  // namespace semdec_detail

inline constexpr int kDefaultOutlierThreshold = 32;

// A cell is flagged when it differs from the median of its 3x3 neighbourhood
// (self excluded, window clipped at the borders) by more than `delta`.
inline ErrorMask estimate_error_mask(const BlockGrid& g, int delta = kDefaultOutlierThreshold) {
  if (g.width < 3 || g.height < 3) throw ContractViolation("error mask needs a grid of at least 3x3");
  ErrorMask m;
  m.flags.assign(g.values.size(), 0);
  std::vector<int> nb;
  nb.reserve(8);
  for (std::size_t y = 0; y < g.height; ++y)
    for (std::size_t x = 0; x < g.width; ++x)
      for (std::size_t c = 0; c < g.channels; ++c) {
        nb.clear();
        semdec_detail::for_each_neighbor(g, x, y, [&](std::size_t nx, std::size_t ny) { nb.push_back(g.at(nx, ny, c)); });
        const double med = semdec_detail::median(nb);
        if (std::fabs(static_cast<double>(g.at(x, y, c)) - med) > delta) {
          m.flags[(y * g.width + x) * g.channels + c] = 1;
          ++m.flagged;
        }
      }
  m.fraction = g.values.empty() ? 0.0 : static_cast<double>(m.flagged) / static_cast<double>(g.values.size());
  return m;
}

struct DecoderCapabilities {
  bool handles_error_mask = false;
  std::size_t max_upscale = 255;
};

struct RestoreRequest {
  const BlockGrid& grid;
  const ErrorMask* mask = nullptr;  // optional
  std::size_t block_size = 1;
  std::size_t width = 0;
  std::size_t height = 0;
};

// Receiver-side source decoder: turns a received block-mean grid into an image
// of the requested size. Implementations must return exactly width x height.
class SemanticDecoder {
 public:
  virtual ~SemanticDecoder() = default;
  virtual std::string id() const = 0;
  virtual DecoderCapabilities capabilities() const = 0;
  virtual Image restore(const RestoreRequest& req) const = 0;
};

// Non-generative reference point: bilinear interpolation of the block means.
class UpsampleDecoder final : public SemanticDecoder {
 public:
  std::string id() const override { return "upsample"; }
  DecoderCapabilities capabilities() const override { return {false, 255}; }
  Image restore(const RestoreRequest& req) const override {
    return upscale_bilinear(req.grid, req.block_size, req.width, req.height);
  }
};

struct InpaintOptions {
  int max_passes = 5;
  int delta = kDefaultOutlierThreshold;
};

// Replaces flagged cells by the median of their unflagged neighbours, pass by
// pass, then upsamples bilinearly.
inline BlockGrid inpaint_grid(const BlockGrid& g, const ErrorMask& mask, int max_passes) {
  if (mask.flags.size() != g.values.size()) throw ContractViolation("error mask not aligned to grid");
  BlockGrid out = g;
  std::vector<std::uint8_t> flags = mask.flags;
  std::vector<int> nb;
  struct Update {
    std::size_t index;
    std::uint8_t value;
  };
  std::vector<Update> updates;
  for (int pass = 0; pass < max_passes; ++pass) {
    updates.clear();
    for (std::size_t y = 0; y < g.height; ++y)
      for (std::size_t x = 0; x < g.width; ++x)
        for (std::size_t c = 0; c < g.channels; ++c) {
          const std::size_t idx = (y * g.width + x) * g.channels + c;
          if (!flags[idx]) continue;
          nb.clear();
          semdec_detail::for_each_neighbor(g, x, y, [&](std::size_t nx, std::size_t ny) {
            const std::size_t j = (ny * g.width + nx) * g.channels + c;
            if (!flags[j]) nb.push_back(out.values[j]);
          });
          if (nb.empty()) continue;
          updates.push_back({idx, clamp_round_u8(semdec_detail::median(nb))});
        }
    if (updates.empty()) break;
    for (const auto& u : updates) {
      out.values[u.index] = u.value;
      flags[u.index] = 0;
    }
  }
  return out;
}

class InpaintDecoder final : public SemanticDecoder {
 public:
  explicit InpaintDecoder(InpaintOptions opts = {}) : opts_(opts) {}
  std::string id() const override { return "inpaint"; }
  DecoderCapabilities capabilities() const override { return {true, 255}; }
  Image restore(const RestoreRequest& req) const override {
    const ErrorMask estimated = req.mask ? ErrorMask{} : estimate_error_mask(req.grid, opts_.delta);
    const ErrorMask& mask = req.mask ? *req.mask : estimated;
    return upscale_bilinear(inpaint_grid(req.grid, mask, opts_.max_passes), req.block_size, req.width, req.height);
  }

 private:
  InpaintOptions opts_;
};

}  // namespace gencom
