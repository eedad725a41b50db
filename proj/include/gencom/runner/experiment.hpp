#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "gencom/codes.hpp"
#include "gencom/crc.hpp"
#include "gencom/dct.hpp"
#include "gencom/harq.hpp"
#include "gencom/image.hpp"
#include "gencom/lpf.hpp"
#include "gencom/metrics.hpp"
#include "gencom/rng.hpp"
#include "gencom/runner/config.hpp"
#include "gencom/runner/table.hpp"
#include "gencom/semdec.hpp"
#include "gencom/sidecar.hpp"

namespace gencom::runner {

// Seed of one trial. Depends only on its own coordinates, so adding trials,
// SNR points or schemes never changes existing rows.
inline std::uint64_t trial_seed(std::uint64_t base, const std::string& scheme, std::size_t snr_index, std::size_t trial) {
  return derive_seed(base, {fnv1a64(scheme), snr_index, trial});
}

// Channel bits of a gencom scheme's first transmission for an image of this size.
inline std::size_t gencom_channel_bits(const SchemeConfig& s, std::size_t w, std::size_t h, std::size_t c) {
  std::size_t bits = 8 * lpf_payload_size(w, h, c, s.lpf.block_size);
  if (s.harq.kind == HarqPolicy::Kind::crc_based) bits += 16;
  return ChannelCode(s.code).coded_length(bits);
}

struct MatchedQuality {
  int quality = 1;
  std::size_t channel_bits = 0;
  bool fits = false;  // false when even quality 1 exceeds the budget
};

// Highest DCT quality whose CRC-framed, channel-coded payload fits in
// `budget_bits`, by bisection (payload size is treated as nondecreasing in q).
inline MatchedQuality matched_dct_quality(const Image& img, const CodeSpec& code, std::size_t budget_bits) {
  const ChannelCode cc(code);
  auto bits_at = [&](int q) { return cc.coded_length(8 * dct_encode(img, {q}).payload.size() + 16); };
  MatchedQuality m;
  m.channel_bits = bits_at(1);
  if (m.channel_bits > budget_bits) return m;
  m.fits = true;
  int lo = 1, hi = 100;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (bits_at(mid) <= budget_bits) lo = mid;
    else hi = mid - 1;
  }
  m.quality = lo;
  m.channel_bits = bits_at(lo);
  return m;
}

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  std::filesystem::path base_dir;  // relative image paths resolve here (empty = cwd)
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (scheme, snr index, trial)
  std::vector<double> wall_ms;       // same order; not part of the deterministic tables
  std::vector<std::string> traces;   // HARQ JSON lines per trial, same order
  std::size_t sidecar_fallbacks = 0;

  Table trials() const { return to_table(records); }
  Table summary() const { return summarize(trials()); }
  Table timing() const {
    Table t;
    t.schema = kTimingSchema;
    t.columns = {"scheme", "snr_db", "trial", "wall_ms"};
    for (std::size_t i = 0; i < records.size(); ++i)
      t.rows.push_back({records[i].scheme, format_number(records[i].snr_db), std::to_string(records[i].trial),
                        format_number(wall_ms[i])});
    return t;
  }
};

namespace experiment_detail {

struct LoadedImage {
  std::string name;
  Image image;
};

// Wraps the external decoder for one trial to learn whether it fell back.
class TracedExternal final : public SemanticDecoder {
 public:
  explicit TracedExternal(const ExternalDecoder& d) : d_(d) {}
  std::string id() const override { return d_.id(); }
  DecoderCapabilities capabilities() const override { return d_.capabilities(); }
  Image restore(const RestoreRequest& req) const override { return d_.restore(req, &fell_back); }
  mutable bool fell_back = false;

 private:
  const ExternalDecoder& d_;
};

struct Decoders {
  UpsampleDecoder upsample;
  InpaintDecoder inpaint;
  std::unique_ptr<ExternalDecoder> external;
};

inline ErrorStats grid_error_stats(const BlockGrid& sent, const BlockGrid& received) {
  return run_length_stats(unpack_bytes(sent.values), unpack_bytes(received.values));
}

inline bool power_allocated(const SchemeConfig& s) {
  return !s.power.is_uniform() &&
         (s.code.kind == CodeSpec::Kind::uncoded || s.code.kind == CodeSpec::Kind::repetition);
}

inline void run_gencom(const SchemeConfig& s, const Image& img, const ChannelConfig& ch, const Decoders& decs,
                       TrialRecord& rec, std::string& trace) {
  const LinkOptions link{s.code, s.interleaver, s.power};
  std::optional<TracedExternal> traced;
  const SemanticDecoder* decoder = &decs.inpaint;
  if (s.decoder == "upsample") decoder = &decs.upsample;
  if (s.decoder == "external") decoder = &traced.emplace(*decs.external);

  HarqSession session;
  BlockGrid grid;
  std::size_t b = s.lpf.block_size;
  Image output;
  if (s.harq.kind == HarqPolicy::Kind::semantic_aware) {
    auto res = run_semantic_harq(img, s.lpf, ch, s.harq, *decoder, link);
    session = std::move(res.session);
    grid = std::move(res.grid);
    b = res.block_size;
    rec.f = res.mask.fraction;
    output = std::move(res.output);
  } else {
    const CompressedImage sent = lpf_encode(img, s.lpf);
    const BitVec framed = crc_append(unpack_bytes(sent.payload));
    auto res = run_crc_harq(framed, s.code, ch, s.harq.max_rounds, link);
    session = std::move(res.session);
    CompressedImage received = sent;
    received.payload = pack_bits(crc_strip(res.decoded));
    grid = lpf_grid(received);
    const auto mask = estimate_error_mask(grid, s.harq.delta);
    rec.f = mask.fraction;
    output = decoder->restore({grid, &mask, b, img.width, img.height});
  }
  const auto stats = grid_error_stats(lpf_grid(lpf_encode(img, {b, s.lpf.mode})), grid);
  rec.mean_run_len = stats.mean_run_len();
  rec.burstiness = stats.burstiness();
  rec.ber_pre = session.rounds.front().ber_channel;
  rec.ber_post = session.rounds.back().ber_post;
  rec.retx_rounds = session.retransmissions();
  rec.ack = session.outcome == HarqOutcome::ack;
  rec.channel_bits = session.rounds.front().channel_bits;
  rec.psnr = psnr(img, output);
  rec.ssim = ssim(img, output);
  TxScheme tx;
  tx.width = img.width;
  tx.height = img.height;
  tx.channels = img.channels;
  tx.source = TxScheme::Source::lpf;
  tx.block_size = s.lpf.block_size;
  tx.code = s.code;
  tx.crc = s.harq.kind == HarqPolicy::Kind::crc_based;
  tx.power_allocation = power_allocated(s);
  rec.flops_tx = tx_flops(tx).total;
  rec.decoder = decoder->id();
  if (traced && traced->fell_back) rec.decoder = "external>inpaint";
  trace = to_jsonl(session);
}

inline void run_baseline(const SchemeConfig& s, int quality, const Image& img, const ChannelConfig& ch, TrialRecord& rec,
                         std::string& trace) {
  auto res = run_baseline_image(img, {quality}, s.code, ch, s.harq.max_rounds);
  const auto stats = run_length_stats(res.framed, res.received);
  rec.mean_run_len = stats.mean_run_len();
  rec.burstiness = stats.burstiness();
  rec.ber_pre = res.session.rounds.front().ber_channel;
  rec.ber_post = res.session.rounds.back().ber_post;
  rec.retx_rounds = res.session.retransmissions();
  rec.ack = res.session.outcome == HarqOutcome::ack;
  rec.channel_bits = res.session.rounds.front().channel_bits;
  rec.psnr = psnr(img, res.output);
  rec.ssim = ssim(img, res.output);
  TxScheme tx;
  tx.width = img.width;
  tx.height = img.height;
  tx.channels = img.channels;
  tx.source = TxScheme::Source::dct;
  tx.quality = quality;
  tx.source_bits = 8 * res.sent.payload.size();
  tx.code = s.code;
  tx.crc = true;
  rec.flops_tx = tx_flops(tx).total;
  rec.decoder = "dct";
  trace = to_jsonl(res.session);
}

}  // namespace experiment_detail

// Runs every (scheme, snr, trial) of the configuration. Trial i of a point
// uses image i mod |images|. Rows come back in configuration order whatever
// the thread count. With fallback disabled, a sidecar failure aborts the run
// with SidecarError.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  using namespace experiment_detail;
  validate(cfg);

  std::vector<LoadedImage> images;
  for (const auto& p : cfg.images) {
    std::filesystem::path path(p);
    if (path.is_relative() && !opt.base_dir.empty()) path = opt.base_dir / path;
    if (!std::filesystem::exists(path)) throw IoError("missing image " + path.string());
    images.push_back({path.stem().string(), load_image(path)});
  }

  Decoders decs;
  decs.inpaint = InpaintDecoder(cfg.inpaint);
  const bool needs_external = std::any_of(cfg.schemes.begin(), cfg.schemes.end(), [](const SchemeConfig& s) {
    return s.kind == SchemeConfig::Kind::gencom && s.decoder == "external";
  });
  if (needs_external) {
    ExternalDecoderOptions eo;
    if (!cfg.sidecar.address.empty()) eo.address = SidecarAddress::parse(cfg.sidecar.address);
    eo.timeout = std::chrono::milliseconds(cfg.sidecar.timeout_ms);
    eo.connect_timeout = std::chrono::milliseconds(cfg.sidecar.connect_timeout_ms);
    eo.allow_fallback = cfg.sidecar.fallback;
    eo.max_in_flight = cfg.sidecar.max_in_flight;
    eo.fallback = cfg.inpaint;
    decs.external = std::make_unique<ExternalDecoder>(eo);
  }

  // DCT quality per (baseline scheme, image).
  std::map<std::pair<std::size_t, std::size_t>, int> quality;
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    const auto& s = cfg.schemes[si];
    if (s.kind != SchemeConfig::Kind::baseline) continue;
    for (std::size_t ii = 0; ii < images.size(); ++ii) {
      int q = s.dct.quality;
      if (!s.match_bandwidth_of.empty()) {
        const auto& img = images[ii].image;
        const auto budget = gencom_channel_bits(*cfg.find_scheme(s.match_bandwidth_of), img.width, img.height, img.channels);
        const auto m = matched_dct_quality(img, s.code, budget);
        if (!m.fits)
          spdlog::warn("{}: {} needs {} channel bits at quality 1, over the {}-bit budget", s.id, images[ii].name,
                       m.channel_bits, budget);
        q = m.quality;
      }
      quality[{si, ii}] = q;
    }
  }

  struct Task {
    std::size_t scheme, snr, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si)
    for (std::size_t ni = 0; ni < cfg.channel.snr_db.size(); ++ni)
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({si, ni, t});

  ExperimentResult out;
  out.records.resize(tasks.size());
  out.wall_ms.resize(tasks.size());
  out.traces.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto& task = tasks[i];
      const auto& s = cfg.schemes[task.scheme];
      const auto& img = images[task.trial % images.size()];
      auto& rec = out.records[i];
      rec.scheme = s.id;
      rec.snr_db = cfg.channel.snr_db[task.snr];
      rec.trial = task.trial;
      rec.seed = trial_seed(cfg.seed, s.id, task.snr, task.trial);
      rec.image = img.name;
      ChannelConfig ch;
      ch.model = cfg.channel.model;
      ch.block_len = cfg.channel.block_len;
      ch.snr_db = rec.snr_db;
      ch.seed = rec.seed;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (s.kind == SchemeConfig::Kind::gencom)
          run_gencom(s, img.image, ch, decs, rec, out.traces[i]);
        else
          run_baseline(s, quality.at({task.scheme, task.trial % images.size()}), img.image, ch, rec, out.traces[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        abort.store(true);
        return;
      }
      out.wall_ms[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, tasks.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (decs.external) out.sidecar_fallbacks = decs.external->downgrades();
  return out;
}

struct WrittenFiles {
  std::filesystem::path trials, summary, timing, harq_trace;
};

inline WrittenFiles write_outputs(const ExperimentResult& res, const OutputConfig& o) {
  const std::filesystem::path dir(o.dir);
  WrittenFiles w;
  w.trials = dir / o.trials;
  write_text(w.trials, to_csv(res.trials()));
  if (!o.summary.empty()) {
    w.summary = dir / o.summary;
    write_text(w.summary, to_csv(res.summary()));
  }
  if (!o.timing.empty()) {
    w.timing = dir / o.timing;
    write_text(w.timing, to_csv(res.timing()));
  }
  if (!o.harq_trace.empty()) {
    w.harq_trace = dir / o.harq_trace;
    std::string all;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      // prefix each round with the trial coordinates
      const auto& r = res.records[i];
      const std::string head = "{\"scheme\":\"" + r.scheme + "\",\"snr_db\":" + format_number(r.snr_db) +
                               ",\"trial\":" + std::to_string(r.trial) + ",";
      std::size_t pos = 0;
      const auto& t = res.traces[i];
      while (pos < t.size()) {
        const auto nl = t.find('\n', pos);
        all += head + t.substr(pos + 1, nl - pos);
        pos = nl + 1;
      }
    }
    write_text(w.harq_trace, all);
  }
  return w;
}

}  // namespace gencom::runner
