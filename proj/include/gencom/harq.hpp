#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gencom/bits.hpp"
#include "gencom/codes.hpp"
#include "gencom/crc.hpp"
#include "gencom/dct.hpp"
#include "gencom/error.hpp"
#include "gencom/interleaver.hpp"
#include "gencom/lpf.hpp"
#include "gencom/phy.hpp"
#include "gencom/semdec.hpp"

namespace gencom {

enum class FallbackStep { chase, recompress };

struct HarqPolicy {
  enum class Kind { crc_based, semantic_aware };
  Kind kind = Kind::semantic_aware;
  int max_rounds = 4;
  double tau = 0.05;  // accepted corruption fraction
  int delta = kDefaultOutlierThreshold;
  // Step taken after the i-th NACK; the last entry repeats.
  std::vector<FallbackStep> ladder = {FallbackStep::chase, FallbackStep::recompress};

  void validate() const {
    if (max_rounds < 1) throw ContractViolation("max_rounds must be >= 1");
    if (!(tau > 0.0 && tau < 1.0)) throw ContractViolation("tau must lie in (0, 1)");
    if (ladder.empty()) throw ContractViolation("fallback ladder must not be empty");
  }
};

enum class HarqOutcome { ack, nack_exhausted };

inline std::string to_string(HarqOutcome o) { return o == HarqOutcome::ack ? "ack" : "nack_exhausted"; }

struct RoundRecord {
  int round = 1;
  std::string action = "initial";  // initial | chase | recompress
  std::size_t block_size = 0;      // LPF block size (semantic sessions)
  std::size_t payload_bits = 0;
  std::size_t channel_bits = 0;
  std::size_t chase_depth = 1;  // transmissions held in the Chase buffer
  bool buffer_reset = false;
  double ber_channel = 0.0;  // hard-decision BER of this round's own reception
  double ber_post = 0.0;     // payload BER after combining and decoding
  std::optional<double> corruption_fraction;
  std::optional<bool> crc_pass;
  bool ack = false;
};

struct HarqSession {
  HarqPolicy::Kind kind = HarqPolicy::Kind::crc_based;
  std::vector<RoundRecord> rounds;
  HarqOutcome outcome = HarqOutcome::nack_exhausted;

  int round_count() const noexcept { return static_cast<int>(rounds.size()); }
  int retransmissions() const noexcept { return round_count() - 1; }
};

// One JSON object per round.
inline std::string to_jsonl(const HarqSession& s) {
  std::string out;
  for (const auto& r : s.rounds) {
    nlohmann::ordered_json j;
    j["policy"] = s.kind == HarqPolicy::Kind::crc_based ? "crc_based" : "semantic_aware";
    j["round"] = r.round;
    j["action"] = r.action;
    j["block_size"] = r.block_size;
    j["payload_bits"] = r.payload_bits;
    j["channel_bits"] = r.channel_bits;
    j["chase_depth"] = r.chase_depth;
    j["buffer_reset"] = r.buffer_reset;
    j["ber_channel"] = r.ber_channel;
    j["ber_post"] = r.ber_post;
    j["corruption_fraction"] = r.corruption_fraction ? nlohmann::ordered_json(*r.corruption_fraction) : nullptr;
    j["crc_pass"] = r.crc_pass ? nlohmann::ordered_json(*r.crc_pass) : nullptr;
    j["ack"] = r.ack;
    j["outcome"] = to_string(s.outcome);
    out += j.dump();
    out += '\n';
  }
  return out;
}

// Bit chain shared by both controllers: encode, interleave, modulate.
struct LinkOptions {
  CodeSpec code = CodeSpec::uncoded();
  InterleaverSpec interleaver = InterleaverSpec::identity();
  PowerProfile profile = PowerProfile::uniform();
};

namespace harq_detail {

// Per-coded-bit power weights following the payload bit significance. Only
// uncoded and repetition streams keep a bit-to-significance mapping; other
// codes are sent with uniform power.
inline std::vector<double> coded_powers(const LinkOptions& link, std::size_t coded_bits) {
  if (link.profile.is_uniform()) return {};
  const auto& w = link.profile.weights;
  std::vector<double> p;
  if (link.code.kind == CodeSpec::Kind::uncoded) {
    p.resize(coded_bits);
    for (std::size_t i = 0; i < coded_bits; ++i) p[i] = w[i % w.size()];
  } else if (link.code.kind == CodeSpec::Kind::repetition) {
    p.resize(coded_bits);
    for (std::size_t i = 0; i < coded_bits; ++i) p[i] = w[(i / link.code.repetition) % w.size()];
  } else {
    return {};
  }
  return p;
}

struct PreparedFrame {
  BitVec coded;                      // before interleaving
  BitVec on_air;                     // after interleaving
  std::vector<double> powers;        // per on-air bit of the padded frame, empty = uniform
};

inline PreparedFrame prepare(const ChannelCode& code, const LinkOptions& link, std::span<const std::uint8_t> msg) {
  PreparedFrame f;
  f.coded = code.encode(msg);
  auto w = coded_powers(link, f.coded.size());
  if (link.interleaver.kind != InterleaverSpec::Kind::none) {
    f.on_air = interleave(std::span<const std::uint8_t>(f.coded), link.interleaver);
    if (!w.empty()) w = interleave(std::span<const double>(w), link.interleaver);
  } else {
    f.on_air = f.coded;
  }
  if (!w.empty()) {
    if (w.size() % 2) w.push_back(1.0);
    f.powers = normalize_powers(std::move(w));
  }
  return f;
}

// Sends one copy and returns LLRs in coded (deinterleaved) order.
inline LlrVec transmit(const PreparedFrame& f, const LinkOptions& link, const ChannelConfig& ch) {
  const auto tx = qpsk_modulate(f.on_air, std::span<const double>(f.powers));
  const auto rx = apply_channel(tx, ch);
  auto llr = qpsk_demodulate(rx, ch, std::span<const double>(f.powers));
  if (link.interleaver.kind != InterleaverSpec::Kind::none)
    llr = deinterleave(std::span<const double>(llr), link.interleaver);
  return llr;
}

inline ChannelConfig round_channel(const ChannelConfig& base, int round) {
  ChannelConfig c = base;
  c.seed = derive_seed(base.seed, {0x524F554E44ULL, static_cast<std::uint64_t>(round)});
  return c;
}

inline double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace harq_detail

struct CrcHarqResult {
  HarqSession session;
  BitVec decoded;  // message + CRC as decoded in the last round
};

// CRC-triggered HARQ with Chase combining. `framed` already carries its CRC.
inline CrcHarqResult run_crc_harq(std::span<const std::uint8_t> framed, const CodeSpec& spec, const ChannelConfig& channel,
                                  int max_rounds, const LinkOptions& link_in = {}) {
  if (max_rounds < 1) throw ContractViolation("max_rounds must be >= 1");
  LinkOptions link = link_in;
  link.code = spec;
  const ChannelCode code(spec);
  const auto frame = harq_detail::prepare(code, link, framed);
  CrcHarqResult res;
  res.session.kind = HarqPolicy::Kind::crc_based;
  LlrVec buffer;
  for (int r = 1; r <= max_rounds; ++r) {
    const auto llr = harq_detail::transmit(frame, link, harq_detail::round_channel(channel, r));
    chase_accumulate(buffer, llr);
    res.decoded = code.decode(buffer, framed.size());
    RoundRecord rec;
    rec.round = r;
    rec.action = r == 1 ? "initial" : "chase";
    rec.payload_bits = framed.size();
    rec.channel_bits = frame.coded.size();
    rec.chase_depth = static_cast<std::size_t>(r);
    rec.buffer_reset = r == 1;
    rec.ber_channel = harq_detail::ratio(count_bit_errors(hard_decisions(llr), frame.coded), frame.coded.size());
    rec.ber_post = harq_detail::ratio(count_bit_errors(res.decoded, framed), framed.size());
    rec.crc_pass = crc_check(res.decoded);
    rec.ack = *rec.crc_pass;
    res.session.rounds.push_back(rec);
    if (rec.ack) {
      res.session.outcome = HarqOutcome::ack;
      break;
    }
  }
  return res;
}

struct SemanticHarqResult {
  HarqSession session;
  BlockGrid grid;  // grid handed to the decoder
  std::size_t block_size = 0;
  ErrorMask mask;
  Image output;
};

// Semantic-aware HARQ over the LPF chain. Each round's hard-decided grid is
// scored by the corruption fraction f of its outlier mask and acknowledged when
// f <= tau. NACKs walk the fallback ladder: chase resends the same payload
// into the Chase buffer, recompress halves the block size and restarts the
// buffer (a recompression that cannot shrink b degenerates to chase).
inline SemanticHarqResult run_semantic_harq(const Image& img, const LpfConfig& lpf, const ChannelConfig& channel,
                                            const HarqPolicy& policy, const SemanticDecoder& decoder,
                                            const LinkOptions& link = {}) {
  policy.validate();
  if (policy.kind != HarqPolicy::Kind::semantic_aware) throw ContractViolation("policy kind must be semantic_aware");
  const ChannelCode code(link.code);
  std::size_t b = lpf.block_size;
  CompressedImage payload = lpf_encode(img, {b, lpf.mode});
  BitVec bits = unpack_bytes(payload.payload);
  auto frame = harq_detail::prepare(code, link, bits);
  LlrVec buffer;
  std::size_t depth = 0;

  SemanticHarqResult res;
  res.session.kind = HarqPolicy::Kind::semantic_aware;
  for (int r = 1; r <= policy.max_rounds; ++r) {
    RoundRecord rec;
    rec.round = r;
    if (r > 1) {
      const std::size_t step = std::min<std::size_t>(static_cast<std::size_t>(r - 2), policy.ladder.size() - 1);
      const bool recompress = policy.ladder[step] == FallbackStep::recompress && std::max<std::size_t>(1, b / 2) != b;
      rec.action = recompress ? "recompress" : "chase";
      if (recompress) {
        b = std::max<std::size_t>(1, b / 2);
        payload = lpf_encode(img, {b, lpf.mode});
        bits = unpack_bytes(payload.payload);
        frame = harq_detail::prepare(code, link, bits);
        buffer.clear();
        depth = 0;
      }
    }
    rec.buffer_reset = depth == 0;
    const auto llr = harq_detail::transmit(frame, link, harq_detail::round_channel(channel, r));
    chase_accumulate(buffer, llr);
    ++depth;
    const BitVec decoded = code.decode(buffer, bits.size());
    CompressedImage received = payload;
    received.payload = pack_bits(decoded);
    res.grid = lpf_grid(received);
    res.block_size = b;
    res.mask = estimate_error_mask(res.grid, policy.delta);

    rec.block_size = b;
    rec.payload_bits = bits.size();
    rec.channel_bits = frame.coded.size();
    rec.chase_depth = depth;
    rec.ber_channel = harq_detail::ratio(count_bit_errors(hard_decisions(llr), frame.coded), frame.coded.size());
    rec.ber_post = harq_detail::ratio(count_bit_errors(decoded, bits), bits.size());
    rec.corruption_fraction = res.mask.fraction;
    rec.ack = res.mask.fraction <= policy.tau;
    res.session.rounds.push_back(rec);
    if (rec.ack) {
      res.session.outcome = HarqOutcome::ack;
      break;
    }
  }
  res.output = decoder.restore({res.grid, &res.mask, res.block_size, img.width, img.height});
  return res;
}

struct BaselineResult {
  HarqSession session;
  CompressedImage sent;
  BitVec framed;    // DCT payload + CRC as sent
  BitVec received;  // the same after the last round's channel decoding
  bool decode_failed = false;
  Image output;
};

// Conventional chain: DCT codec, CRC-16, channel code, QPSK, CRC-driven HARQ.
// An undecodable payload yields a uniform mid-grey image.
inline BaselineResult run_baseline_image(const Image& img, const DctConfig& dct, const CodeSpec& spec,
                                         const ChannelConfig& channel, int max_rounds) {
  BaselineResult res;
  res.sent = dct_encode(img, dct);
  res.framed = crc_append(unpack_bytes(res.sent.payload));
  auto harq = run_crc_harq(res.framed, spec, channel, max_rounds);
  res.session = std::move(harq.session);
  res.received = std::move(harq.decoded);
  CompressedImage received = res.sent;
  received.payload = pack_bits(crc_strip(res.received));
  try {
    res.output = dct_decode(received);
  } catch (const DecodeFailure&) {
    res.decode_failed = true;
    res.output = Image(img.width, img.height, img.channels, std::uint8_t{128});
  }
  return res;
}

}  // namespace gencom
