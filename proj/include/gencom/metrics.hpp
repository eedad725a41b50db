#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gencom/codes.hpp"
#include "gencom/error.hpp"
#include "gencom/image.hpp"
#include "gencom/lpf.hpp"

namespace gencom {

// ---------------------------------------------------------------------------
// Image quality

inline double mse(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ContractViolation("image dimensions differ");
  if (a.pixels.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

// Peak 255. Identical images give +infinity.
inline double psnr(const Image& a, const Image& b) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / e);
}

// Mean SSIM over all positions of an 8x8 uniform window (stride 1), averaged
// over channels. C1 = (0.01*255)^2, C2 = (0.03*255)^2. Images smaller than the
// window use a window equal to the smaller dimension.
inline double ssim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ContractViolation("image dimensions differ");
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  const std::size_t win = std::min<std::size_t>({8, a.width, a.height});
  const double n = static_cast<double>(win * win);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < a.channels; ++c)
    for (std::size_t y = 0; y + win <= a.height; ++y)
      for (std::size_t x = 0; x + win <= a.width; ++x) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t dy = 0; dy < win; ++dy)
          for (std::size_t dx = 0; dx < win; ++dx) {
            const double va = a.at(x + dx, y + dy, c), vb = b.at(x + dx, y + dy, c);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
          }
        const double ma = sa / n, mb = sb / n;
        const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
  return count ? total / static_cast<double>(count) : 1.0;
}

// ---------------------------------------------------------------------------
// Error structure

struct ErrorStats {
  std::size_t bits = 0;
  std::size_t errors = 0;
  std::map<std::size_t, std::size_t> run_histogram;  // run length -> count
  // moments of the gaps between consecutive error positions
  std::size_t gap_count = 0;
  double gap_sum = 0.0;
  double gap_sum_sq = 0.0;

  double ber() const noexcept { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }

  double mean_run_len() const noexcept {
    std::size_t runs = 0;
    for (const auto& [len, cnt] : run_histogram) runs += cnt;
    return runs ? static_cast<double>(errors) / static_cast<double>(runs) : 0.0;
  }

  // Squared coefficient of variation of the inter-error gaps, var / mean^2:
  // about 1 for memoryless (geometric / Poisson) gaps, above 1 when clustered.
  double burstiness() const noexcept {
    if (gap_count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = gap_sum / static_cast<double>(gap_count);
    const double var = gap_sum_sq / static_cast<double>(gap_count) - m * m;
    return var / (m * m);
  }

  // Associative merge of independent blocks (gaps across block boundaries are not counted).
  ErrorStats& merge(const ErrorStats& o) {
    bits += o.bits;
    errors += o.errors;
    for (const auto& [len, cnt] : o.run_histogram) run_histogram[len] += cnt;
    gap_count += o.gap_count;
    gap_sum += o.gap_sum;
    gap_sum_sq += o.gap_sum_sq;
    return *this;
  }
};

inline ErrorStats error_stats_from_indicator(std::span<const std::uint8_t> indicator) {
  ErrorStats st;
  st.bits = indicator.size();
  std::size_t run = 0;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    if (indicator[i]) {
      ++st.errors;
      ++run;
      if (last) {
        const double g = static_cast<double>(i - *last);
        ++st.gap_count;
        st.gap_sum += g;
        st.gap_sum_sq += g * g;
      }
      last = i;
    } else if (run) {
      ++st.run_histogram[run];
      run = 0;
    }
  }
  if (run) ++st.run_histogram[run];
  return st;
}

inline ErrorStats run_length_stats(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size()) throw ContractViolation("run_length_stats: length mismatch");
  std::vector<std::uint8_t> ind(tx.size());
  for (std::size_t i = 0; i < tx.size(); ++i) ind[i] = (tx[i] ^ rx[i]) & 1u;
  return error_stats_from_indicator(ind);
}

// ---------------------------------------------------------------------------
// Transmitter complexity model
//
// Every primitive (add, multiply, compare, table lookup, XOR, rounding) counts 1.
//
//   stage          rule
//   lpf            (b^2 - 1) adds + 1 multiply per block per channel
//   dct            per 8x8 block per channel: 2*(8*8*8*2) separable transform
//                  + 2 per coefficient (multiply + round) + 4 per coefficient entropy coding
//   crc            2 per protected bit
//   repetition     1 per output bit
//   hamming74      6 XORs per 4-bit block
//   convolutional  2*(K-1) = 12 XORs per input bit, flush bits included
//   ldpc           2 * N * (N/4) per codeword: dense systematic generator with
//                  mean row weight K/2 = N/4
//   modulation     1 lookup per symbol, + 2 multiplies per symbol with power allocation
//
// The DCT payload size depends on content; when it is not supplied it is
// taken as a nominal 1 bit per sample.

struct TxScheme {
  enum class Source { lpf, dct };
  std::size_t width = 512;
  std::size_t height = 512;
  std::size_t channels = 1;
  Source source = Source::lpf;
  std::size_t block_size = 8;
  int quality = 75;
  std::optional<std::size_t> source_bits;
  CodeSpec code = CodeSpec::uncoded();
  bool crc = false;
  bool power_allocation = false;
};

struct ComplexityModel {
  std::vector<std::pair<std::string, std::uint64_t>> stages;
  std::uint64_t total = 0;

  std::uint64_t stage(const std::string& name) const {
    for (const auto& [n, v] : stages)
      if (n == name) return v;
    return 0;
  }
};

inline std::size_t tx_source_bits(const TxScheme& s) {
  if (s.source == TxScheme::Source::lpf) return 8 * lpf_payload_size(s.width, s.height, s.channels, s.block_size);
  return s.source_bits.value_or(s.width * s.height * s.channels);
}

inline ComplexityModel tx_flops(const TxScheme& s) {
  ComplexityModel m;
  auto add = [&m](std::string name, std::uint64_t v) {
    m.stages.emplace_back(std::move(name), v);
    m.total += v;
  };
  if (s.source == TxScheme::Source::lpf) {
    if (s.block_size < 1) throw ContractViolation("block size must be >= 1");
    const std::uint64_t blocks = lpf_payload_size(s.width, s.height, s.channels, s.block_size);
    const std::uint64_t b2 = static_cast<std::uint64_t>(s.block_size) * s.block_size;
    add("lpf", blocks * ((b2 - 1) + 1));
  } else {
    const std::uint64_t blocks = ceil_div(s.width, 8) * ceil_div(s.height, 8) * s.channels;
    add("dct", blocks * (2 * (8 * 8 * 8 * 2) + 64 * 2 + 64 * 4));
  }
  std::uint64_t bits = tx_source_bits(s);
  if (s.crc) {
    add("crc", 2 * bits);
    bits += 16;
  }
  std::uint64_t coded = bits;
  switch (s.code.kind) {
    case CodeSpec::Kind::uncoded:
      add("channel", 0);
      break;
    case CodeSpec::Kind::repetition:
      coded = bits * s.code.repetition;
      add("channel", coded);
      break;
    case CodeSpec::Kind::hamming74:
      coded = 7 * ((bits + 3) / 4);
      add("channel", 6 * ((bits + 3) / 4));
      break;
    case CodeSpec::Kind::convolutional:
      coded = 2 * (bits + 6);
      add("channel", 12 * (bits + 6));
      break;
    case CodeSpec::Kind::ldpc: {
      const std::uint64_t n = s.code.ldpc_n;
      const std::uint64_t k = n / 2;
      const std::uint64_t codewords = (bits + k - 1) / k;
      coded = codewords * n;
      add("channel", codewords * (2 * n * (n / 4)));
      break;
    }
  }
  const std::uint64_t symbols = (coded + 1) / 2;
  add("modulation", symbols * (s.power_allocation ? 3 : 1));
  return m;
}

// ---------------------------------------------------------------------------
// Coverage

struct QualityCurve {
  std::string scheme;
  std::vector<double> snr_db;   // strictly increasing
  std::vector<double> quality;  // PSNR or SSIM per SNR
};

struct CoverageEntry {
  std::string scheme;
  double min_usable_snr_db = 0.0;
  double extension_db = 0.0;  // baseline minus this scheme
  bool non_monotone = false;
};

struct CoverageSummary {
  double threshold = 0.0;
  std::string baseline;
  std::vector<CoverageEntry> entries;
};

// Infinite quality (lossless PSNR) is capped for interpolation.
inline constexpr double kQualityCap = 100.0;

// SNR above which the curve stays at or above the threshold, by linear
// interpolation between the straddling samples.
inline double min_usable_snr(const QualityCurve& c, double threshold, bool* non_monotone = nullptr) {
  if (c.snr_db.size() != c.quality.size() || c.snr_db.size() < 2)
    throw ContractViolation(c.scheme + ": need >= 2 (snr, quality) samples");
  bool nm = false;
  for (std::size_t i = 1; i < c.snr_db.size(); ++i) {
    if (!(c.snr_db[i] > c.snr_db[i - 1])) throw ContractViolation(c.scheme + ": SNR samples must increase");
    if (std::min(c.quality[i], kQualityCap) < std::min(c.quality[i - 1], kQualityCap)) nm = true;
  }
  if (non_monotone) *non_monotone = nm;
  std::optional<std::size_t> last_below;
  for (std::size_t i = 0; i < c.quality.size(); ++i)
    if (c.quality[i] < threshold) last_below = i;
  if (!last_below) throw CoverageUndefined(c.scheme + ": curve never drops below threshold in the sampled range");
  if (*last_below + 1 == c.quality.size()) throw CoverageUndefined(c.scheme + ": curve never reaches threshold");
  const std::size_t i = *last_below;
  const double q0 = c.quality[i], q1 = std::min(c.quality[i + 1], kQualityCap);
  const double t = (threshold - q0) / (q1 - q0);
  return c.snr_db[i] + t * (c.snr_db[i + 1] - c.snr_db[i]);
}

inline CoverageSummary coverage(std::span<const QualityCurve> curves, std::size_t baseline_index, double threshold) {
  if (baseline_index >= curves.size()) throw ContractViolation("baseline index out of range");
  CoverageSummary s;
  s.threshold = threshold;
  s.baseline = curves[baseline_index].scheme;
  const double base = min_usable_snr(curves[baseline_index], threshold);
  for (const auto& c : curves) {
    CoverageEntry e;
    e.scheme = c.scheme;
    e.min_usable_snr_db = min_usable_snr(c, threshold, &e.non_monotone);
    e.extension_db = base - e.min_usable_snr_db;
    s.entries.push_back(e);
  }
  return s;
}

}  // namespace gencom
