#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "gencom/bits.hpp"
#include "gencom/error.hpp"
#include "gencom/rng.hpp"

namespace gencom {

using Symbol = std::complex<double>;

// Relative power weights per bit-significance position, cycled over the frame.
// With the default period of 8, position 0 is the MSB of each payload byte.
// An empty weight list means uniform power.
struct PowerProfile {
  std::vector<double> weights;

  static PowerProfile uniform() { return {}; }
  static PowerProfile importance_default() { return {{8, 6, 4, 3, 2, 1, 1, 1}}; }

  bool is_uniform() const noexcept { return weights.empty(); }
  bool operator==(const PowerProfile&) const = default;
};

// Per-bit power p_i = w_(i mod period) / mean over the frame, so the frame's
// mean per-bit power is exactly 1.
inline std::vector<double> bit_powers(const PowerProfile& profile, std::size_t nbits) {
  std::vector<double> p(nbits, 1.0);
  if (profile.is_uniform() || nbits == 0) return p;
  for (double w : profile.weights)
    if (!(w > 0.0)) throw ContractViolation("power weights must be positive");
  const std::size_t period = profile.weights.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < nbits; ++i) sum += p[i] = profile.weights[i % period];
  const double mean = sum / static_cast<double>(nbits);
  for (auto& v : p) v /= mean;
  return p;
}

struct SymbolStream {
  std::vector<Symbol> symbols;
  std::size_t bit_count = 0;  // payload bits, excluding the odd-length pad bit
};

// Rescales per-bit weights so their mean is exactly 1.
inline std::vector<double> normalize_powers(std::vector<double> w) {
  if (w.empty()) return w;
  double sum = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw ContractViolation("power weights must be positive");
    sum += v;
  }
  const double mean = sum / static_cast<double>(w.size());
  for (auto& v : w) v /= mean;
  return w;
}

// Gray QPSK: first bit of a pair drives I, second drives Q, 0 -> +, 1 -> -.
// Each dimension carries amplitude sqrt(p_i / 2). `powers` holds one entry per
// bit of the even-padded frame (mean 1), or is empty for uniform power.
inline SymbolStream qpsk_modulate(std::span<const std::uint8_t> bits, std::span<const double> powers) {
  BitVec frame(bits.begin(), bits.end());
  if (frame.size() % 2) frame.push_back(0);
  if (!powers.empty() && powers.size() != frame.size())
    throw ContractViolation("power vector must cover the padded frame");
  SymbolStream out;
  out.bit_count = bits.size();
  out.symbols.resize(frame.size() / 2);
  for (std::size_t k = 0; k < out.symbols.size(); ++k) {
    const double pi = powers.empty() ? 1.0 : powers[2 * k], pq = powers.empty() ? 1.0 : powers[2 * k + 1];
    const double ai = std::sqrt(pi * 0.5), aq = std::sqrt(pq * 0.5);
    out.symbols[k] = {frame[2 * k] ? -ai : ai, frame[2 * k + 1] ? -aq : aq};
  }
  return out;
}

inline SymbolStream qpsk_modulate(std::span<const std::uint8_t> bits, const PowerProfile& profile = {}) {
  const std::size_t frame = bits.size() + bits.size() % 2;
  if (profile.is_uniform()) return qpsk_modulate(bits, std::span<const double>{});
  const auto p = bit_powers(profile, frame);
  return qpsk_modulate(bits, std::span<const double>(p));
}

inline double average_power(std::span<const Symbol> s) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& x : s) acc += std::norm(x);
  return acc / static_cast<double>(s.size());
}

struct ChannelConfig {
  enum class Model { awgn, rayleigh_block };
  Model model = Model::awgn;
  std::size_t block_len = 64;  // symbols per fading block
  double snr_db = 0.0;         // Es/N0 per QPSK symbol
  std::uint64_t seed = 1;

  double n0() const noexcept { return std::pow(10.0, -snr_db / 10.0); }
  bool operator==(const ChannelConfig&) const = default;
};

// Es/N0 -> Eb/N0 for QPSK (2 coded bits per symbol) and a code of the given rate.
inline double ebn0_db_from_esn0_db(double esn0_db, double rate) {
  return esn0_db - 10.0 * std::log10(2.0) - 10.0 * std::log10(rate);
}

struct ChannelOutput {
  SymbolStream received;
  std::vector<Symbol> gains;  // one per symbol for fading channels, empty for AWGN
};

inline ChannelOutput apply_channel(const SymbolStream& tx, const ChannelConfig& cfg) {
  if (!std::isfinite(cfg.snr_db)) throw ContractViolation("snr_db must be finite");
  const double sigma = std::sqrt(cfg.n0() / 2.0);
  const std::uint64_t noise_seed = derive_seed(cfg.seed, {0x4E4F495345ULL});
  ChannelOutput out;
  out.received.bit_count = tx.bit_count;
  out.received.symbols.resize(tx.symbols.size());
  if (cfg.model == ChannelConfig::Model::rayleigh_block) {
    if (cfg.block_len == 0) throw ContractViolation("fading block length must be positive");
    const std::uint64_t fade_seed = derive_seed(cfg.seed, {0x46414445ULL});
    out.gains.resize(tx.symbols.size());
    for (std::size_t k = 0; k < tx.symbols.size(); ++k) {
      const auto [gr, gi] = counter_gaussian_pair(fade_seed, k / cfg.block_len);
      out.gains[k] = Symbol(gr, gi) * std::sqrt(0.5);
    }
  }
  for (std::size_t k = 0; k < tx.symbols.size(); ++k) {
    const auto [nr, ni] = counter_gaussian_pair(noise_seed, k);
    const Symbol h = out.gains.empty() ? Symbol(1.0, 0.0) : out.gains[k];
    out.received.symbols[k] = h * tx.symbols[k] + Symbol(sigma * nr, sigma * ni);
  }
  return out;
}

// Coherent LLRs: L = 4 a Re/Im(conj(h) y) / N0, a = per-dimension amplitude.
// `powers` must match what the transmitter used (empty = uniform).
inline LlrVec qpsk_demodulate(const ChannelOutput& rx, const ChannelConfig& cfg, std::span<const double> powers) {
  const auto& syms = rx.received.symbols;
  if (cfg.model == ChannelConfig::Model::rayleigh_block && rx.gains.size() != syms.size())
    throw ContractViolation("fading channel requires per-symbol gains for coherent demodulation");
  if (!powers.empty() && powers.size() != 2 * syms.size())
    throw ContractViolation("power vector must cover the padded frame");
  const double scale = 4.0 / cfg.n0();
  LlrVec llr(2 * syms.size());
  for (std::size_t k = 0; k < syms.size(); ++k) {
    const Symbol z = rx.gains.empty() ? syms[k] : std::conj(rx.gains[k]) * syms[k];
    const double pi = powers.empty() ? 1.0 : powers[2 * k], pq = powers.empty() ? 1.0 : powers[2 * k + 1];
    llr[2 * k] = scale * std::sqrt(pi * 0.5) * z.real();
    llr[2 * k + 1] = scale * std::sqrt(pq * 0.5) * z.imag();
  }
  llr.resize(rx.received.bit_count);
  return llr;
}

inline LlrVec qpsk_demodulate(const ChannelOutput& rx, const ChannelConfig& cfg, const PowerProfile& profile = {}) {
  if (profile.is_uniform()) return qpsk_demodulate(rx, cfg, std::span<const double>{});
  const auto p = bit_powers(profile, 2 * rx.received.symbols.size());
  return qpsk_demodulate(rx, cfg, std::span<const double>(p));
}

// Element-wise LLR sum over transmissions of the same payload.
inline LlrVec chase_combine(std::span<const LlrVec> copies) {
  if (copies.empty()) throw ContractViolation("chase_combine needs at least one stream");
  LlrVec out = copies[0];
  for (std::size_t i = 1; i < copies.size(); ++i) {
    if (copies[i].size() != out.size()) throw ContractViolation("chase_combine length mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += copies[i][j];
  }
  return out;
}

// In-place accumulation into a Chase buffer; an empty buffer adopts the stream.
inline void chase_accumulate(LlrVec& buffer, std::span<const double> llr) {
  if (buffer.empty()) {
    buffer.assign(llr.begin(), llr.end());
    return;
  }
  if (buffer.size() != llr.size()) throw ContractViolation("chase buffer length mismatch");
  for (std::size_t j = 0; j < llr.size(); ++j) buffer[j] += llr[j];
}

// Gaussian tail probability.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Per-bit BER of Gray QPSK on AWGN at the given Es/N0.
inline double qpsk_ber_awgn(double esn0_db) { return q_function(std::sqrt(std::pow(10.0, esn0_db / 10.0))); }

}  // namespace gencom
