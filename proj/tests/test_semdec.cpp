#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gencom/lpf.hpp"
#include "gencom/metrics.hpp"
#include "gencom/rng.hpp"
#include "gencom/semdec.hpp"
#include "test_support.hpp"

using namespace gencom;

namespace {

BlockGrid make_grid(std::size_t w, std::size_t h, std::uint8_t v) { return {w, h, 1, std::vector<std::uint8_t>(w * h, v)}; }

// Replaces a fraction of cells, chosen at random, with uniformly random values.
BlockGrid corrupt(const BlockGrid& g, double frac, std::uint64_t seed) {
  BlockGrid out = g;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (counter_uniform(seed, 2 * i) < frac) out.values[i] = static_cast<std::uint8_t>(counter_u64(seed, 2 * i + 1) & 0xFF);
  return out;
}

}  // namespace

TEST(ErrorMask, SmoothRampHasNoFlags) {
  BlockGrid g = make_grid(20, 12, 0);
  for (std::size_t y = 0; y < g.height; ++y)
    for (std::size_t x = 0; x < g.width; ++x) g.values[y * g.width + x] = static_cast<std::uint8_t>(10 * x + 5 * y);
  // steepest neighbour step is 15 per cell; a clipped corner window can reach
  // 2 steps away diagonally, still below the threshold
  const auto m = estimate_error_mask(g);
  EXPECT_EQ(m.flagged, 0u);
  EXPECT_EQ(m.fraction, 0.0);
}

TEST(ErrorMask, IsolatedOutlierFlaggedAlone) {
  for (auto [x, y] : {std::pair<std::size_t, std::size_t>{4, 3}, {0, 0}, {9, 7}, {0, 5}}) {
    BlockGrid g = make_grid(10, 8, 100);
    g.values[y * 10 + x] = 255;
    const auto m = estimate_error_mask(g);
    EXPECT_EQ(m.flagged, 1u);
    EXPECT_EQ(m.flags[y * 10 + x], 1u);
    EXPECT_DOUBLE_EQ(m.fraction, 1.0 / 80.0);
  }
}

TEST(ErrorMask, ThresholdIsStrict) {
  BlockGrid g = make_grid(5, 5, 100);
  g.values[12] = 132;
  EXPECT_EQ(estimate_error_mask(g, 32).flagged, 0u);
  g.values[12] = 133;
  EXPECT_EQ(estimate_error_mask(g, 32).flagged, 1u);
}

TEST(ErrorMask, MatchesDirectNeighbourhoodScan) {
  // Oracle: explicit clamped-window scan with a sorted median.
  BlockGrid g = make_grid(9, 7, 0);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<std::uint8_t>(counter_u64(3, i) & 0xFF);
  const auto m = estimate_error_mask(g, 40);
  std::size_t count = 0;
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) {
      std::vector<double> nb;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx || dy) && nx >= 0 && ny >= 0 && nx < 9 && ny < 7) nb.push_back(g.values[ny * 9 + nx]);
        }
      std::sort(nb.begin(), nb.end());
      const double med = nb.size() % 2 ? nb[nb.size() / 2] : 0.5 * (nb[nb.size() / 2 - 1] + nb[nb.size() / 2]);
      const bool flag = std::fabs(g.values[y * 9 + x] - med) > 40;
      EXPECT_EQ(m.flags[y * 9 + x], flag ? 1u : 0u) << x << "," << y;
      count += flag;
    }
  EXPECT_EQ(m.flagged, count);
}

TEST(ErrorMask, FullyRandomGridIsTotal) {
  BlockGrid g = make_grid(32, 32, 0);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<std::uint8_t>(counter_u64(8, i) & 0xFF);
  const auto m = estimate_error_mask(g);
  EXPECT_GT(m.fraction, 0.3);
  EXPECT_LE(m.fraction, 1.0);
  EXPECT_EQ(m.flags.size(), g.values.size());
}

TEST(ErrorMask, TooSmallGridRejected) { EXPECT_THROW(estimate_error_mask(make_grid(2, 5, 0)), ContractViolation); }

TEST(ErrorMask, FewFalseFlagsOnCleanImages) {
  for (const auto& img : test_support::shipped_images())
    for (std::size_t b : {2u, 4u, 8u}) {
      const auto g = lpf_grid(lpf_encode(img, {b, ReconstructionMode::bilinear}));
      EXPECT_LT(estimate_error_mask(g).fraction, 0.01) << "b=" << b << " f=" << estimate_error_mask(g).fraction;
    }
}

TEST(Inpaint, SingleCorruptCellRestoredExactly) {
  BlockGrid g = make_grid(8, 8, 100);
  g.values[3 * 8 + 5] = 7;
  const InpaintDecoder dec;
  const Image out = dec.restore({g, nullptr, 4, 32, 32});
  EXPECT_EQ(out, Image(32, 32, 1, std::uint8_t{100}));
}

TEST(Inpaint, EmptyMaskEqualsUpsample) {
  const auto img = test_support::shipped_images()[2];
  const auto g = lpf_grid(lpf_encode(img, {8, ReconstructionMode::bilinear}));
  ErrorMask none;
  none.flags.assign(g.values.size(), 0);
  const Image a = InpaintDecoder().restore({g, &none, 8, img.width, img.height});
  const Image b = UpsampleDecoder().restore({g, nullptr, 8, img.width, img.height});
  EXPECT_EQ(a, b);
}

TEST(Inpaint, UnreachableCellsKeepReceivedValue) {
  BlockGrid g = make_grid(5, 5, 50);
  ErrorMask all;
  all.flags.assign(25, 1);
  all.flagged = 25;
  all.fraction = 1.0;
  g.values[7] = 200;
  EXPECT_EQ(inpaint_grid(g, all, 5).values, g.values);
}

TEST(Inpaint, FlaggedBlobFilledFromOutside) {
  BlockGrid g = make_grid(9, 9, 80);
  ErrorMask m;
  m.flags.assign(81, 0);
  for (std::size_t y = 3; y < 6; ++y)
    for (std::size_t x = 3; x < 6; ++x) {
      g.values[y * 9 + x] = 250;
      m.flags[y * 9 + x] = 1;
    }
  // the centre has no clean neighbour in pass 1 and is filled in pass 2
  EXPECT_EQ(inpaint_grid(g, m, 5).values, std::vector<std::uint8_t>(81, 80));
  EXPECT_EQ(inpaint_grid(g, m, 1).values[4 * 9 + 4], 250);
}

TEST(Inpaint, MisalignedMaskRejected) {
  ErrorMask m;
  m.flags.assign(3, 0);
  EXPECT_THROW(inpaint_grid(make_grid(4, 4, 0), m, 5), ContractViolation);
}

TEST(Inpaint, RestoresScatteredCorruption) {
  for (const auto& img : test_support::shipped_images()) {
    const auto g = lpf_grid(lpf_encode(img, {8, ReconstructionMode::bilinear}));
    double before = 0, after = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto bad = corrupt(g, 0.05, 100 + t);
      before += psnr(img, UpsampleDecoder().restore({bad, nullptr, 8, img.width, img.height}));
      after += psnr(img, InpaintDecoder().restore({bad, nullptr, 8, img.width, img.height}));
    }
    EXPECT_GT(after, before);
  }
}

TEST(Inpaint, Deterministic) {
  const auto img = test_support::shipped_images()[0];
  const auto bad = corrupt(lpf_grid(lpf_encode(img, {4, ReconstructionMode::bilinear})), 0.1, 5);
  const InpaintDecoder dec;
  EXPECT_EQ(dec.restore({bad, nullptr, 4, img.width, img.height}), dec.restore({bad, nullptr, 4, img.width, img.height}));
}

TEST(Upsample, ConstantGridGivesConstantImage) {
  EXPECT_EQ(UpsampleDecoder().restore({make_grid(4, 3, 77), nullptr, 5, 19, 14}), Image(19, 14, 1, std::uint8_t{77}));
}

TEST(Upsample, BlockSizeOneIsIdentity) {
  const auto img = test_support::shipped_images()[1];
  const auto g = lpf_grid(lpf_encode(img, {1, ReconstructionMode::bilinear}));
  EXPECT_EQ(UpsampleDecoder().restore({g, nullptr, 1, img.width, img.height}), img);
}

TEST(Upsample, TwoCellRampFollowsBilinearFormula) {
  BlockGrid g = make_grid(2, 1, 0);
  g.values[1] = 100;
  const std::size_t b = 8;
  const Image out = UpsampleDecoder().restore({g, nullptr, b, 16, 8});
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      const double u = std::clamp((x + 0.5) / b - 0.5, 0.0, 1.0);
      EXPECT_EQ(out.at(x, y), static_cast<std::uint8_t>(std::nearbyint(100.0 * u))) << x;
      if (x) EXPECT_GE(out.at(x, y), out.at(x - 1, y));
    }
  EXPECT_EQ(out.at(0, 0), 0);
  EXPECT_EQ(out.at(15, 0), 100);
}

TEST(Decoders, ReportCapabilities) {
  EXPECT_EQ(UpsampleDecoder().id(), "upsample");
  EXPECT_FALSE(UpsampleDecoder().capabilities().handles_error_mask);
  EXPECT_EQ(InpaintDecoder().id(), "inpaint");
  EXPECT_TRUE(InpaintDecoder().capabilities().handles_error_mask);
}
