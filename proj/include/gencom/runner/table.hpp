#pragma once

// Trial records and the CSV tables they are written to.
//
// Every table starts with a schema line "# gencom-<kind> v<N>" followed by a
// header row with a fixed column order. Numbers use the shortest form that
// parses back exactly; "inf" marks lossless PSNR, an empty cell a value that
// does not apply or is undefined (f for the baseline, burstiness with < 2 gaps).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/metrics.hpp"

namespace gencom::runner {

inline constexpr const char* kTrialsSchema = "# gencom-trials v1";
inline constexpr const char* kSummarySchema = "# gencom-summary v1";
inline constexpr const char* kTimingSchema = "# gencom-timing v1";

struct TrialRecord {
  std::string scheme;
  double snr_db = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string image;
  double ber_pre = 0.0;   // raw channel BER of the first transmission
  double ber_post = 0.0;  // payload BER after combining and decoding, last round
  std::optional<double> f;
  double psnr = 0.0;
  double ssim = 0.0;
  int retx_rounds = 0;
  bool ack = false;
  std::size_t channel_bits = 0;  // coded bits of the first transmission
  std::uint64_t flops_tx = 0;
  double mean_run_len = 0.0;
  double burstiness = std::numeric_limits<double>::quiet_NaN();
  std::string decoder;
};

inline const std::vector<std::string>& trial_columns() {
  static const std::vector<std::string> cols = {"scheme", "snr_db",       "trial",    "seed",         "image",
                                                "ber_pre", "ber_post",    "f",        "psnr",         "ssim",
                                                "retx_rounds", "ack",     "channel_bits", "flops_tx", "mean_run_len",
                                                "burstiness", "decoder"};
  return cols;
}

// ---------------------------------------------------------------------------
// Cell formatting

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Tables

struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  }

  std::size_t column(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw FormatError("table has no column '" + name + "'");
  }

  // Throws naming every missing column at once.
  void require(const std::vector<std::string>& names) const {
    std::string missing;
    for (const auto& n : names)
      if (!find(n)) missing += (missing.empty() ? "" : ", ") + n;
    if (!missing.empty()) throw FormatError("table is missing required columns: " + missing);
  }
};

inline Table to_table(const std::vector<TrialRecord>& records) {
  Table t;
  t.schema = kTrialsSchema;
  t.columns = trial_columns();
  t.rows.reserve(records.size());
  for (const auto& r : records)
    t.rows.push_back({r.scheme, format_number(r.snr_db), std::to_string(r.trial), std::to_string(r.seed), r.image,
                      format_number(r.ber_pre), format_number(r.ber_post),
                      r.f ? format_number(*r.f) : std::string(), format_number(r.psnr), format_number(r.ssim),
                      std::to_string(r.retx_rounds), r.ack ? "1" : "0", std::to_string(r.channel_bits),
                      std::to_string(r.flops_tx), format_number(r.mean_run_len), format_number(r.burstiness),
                      r.decoder});
  return t;
}

inline std::string to_csv(const Table& t) {
  std::string out = t.schema + "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const auto c = s.find(',', pos);
      cells.push_back(s.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    return cells;
  };
  if (!std::getline(in, line)) throw FormatError("empty table");
  if (line.rfind("# gencom-", 0) != 0) throw FormatError("missing schema line, got '" + line + "'");
  t.schema = line;
  if (!std::getline(in, line) || line.empty()) throw FormatError("missing header row");
  t.columns = split(line);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                        " cells, got " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Aggregation

// Running mean and 95% normal-approximation confidence half-width. Samples are
// pushed in table order, so results do not depend on how trials were scheduled.
struct Moments {
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
  double ci95() const {
    if (n < 2) return n ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return 1.96 * std::sqrt(var / static_cast<double>(n));
  }
};

// Metrics averaged per (scheme, snr_db). Lossless PSNR enters the mean as the
// quality cap (100 dB) so that the mean stays finite.
inline const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> m = {"ber_pre", "ber_post",     "f",         "psnr",      "ssim",
                                             "retx_rounds", "ack",      "flops_tx", "mean_run_len", "burstiness"};
  return m;
}

struct GroupKey {
  std::string scheme;
  std::string snr_text;
  double snr_db;
};

// Groups rows by (scheme, snr_db) in order of first appearance.
template <class Fn>
void for_each_group(const Table& t, Fn fn) {
  const auto si = t.column("scheme");
  const auto ni = t.column("snr_db");
  std::vector<GroupKey> order;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto key = std::make_pair(t.rows[r][si], t.rows[r][ni]);
    auto [it, fresh] = rows.try_emplace(key);
    if (fresh) order.push_back({key.first, key.second, parse_number(key.second).value_or(0.0)});
    it->second.push_back(r);
  }
  for (const auto& k : order) fn(k, rows.at({k.scheme, k.snr_text}));
}

inline Moments column_moments(const Table& t, std::size_t col, const std::vector<std::size_t>& rows, bool cap_psnr) {
  Moments m;
  for (auto r : rows) {
    auto v = parse_number(t.rows[r][col]);
    if (!v || std::isnan(*v)) continue;
    if (cap_psnr) v = std::min(*v, kQualityCap);
    m.add(*v);
  }
  return m;
}

inline Table summarize(const Table& trials) {
  if (trials.rows.empty()) throw FormatError("empty table: no trial rows to summarize");
  trials.require({"scheme", "snr_db"});
  Table s;
  s.schema = kSummarySchema;
  s.columns = {"scheme", "snr_db", "n"};
  std::vector<std::pair<std::string, std::size_t>> metrics;
  for (const auto& m : summary_metrics())
    if (auto i = trials.find(m)) {
      metrics.emplace_back(m, *i);
      s.columns.push_back(m + "_mean");
      s.columns.push_back(m + "_ci95");
    }
  for_each_group(trials, [&](const GroupKey& k, const std::vector<std::size_t>& rows) {
    std::vector<std::string> row = {k.scheme, format_number(k.snr_db), std::to_string(rows.size())};
    for (const auto& [name, col] : metrics) {
      const auto m = column_moments(trials, col, rows, name == "psnr");
      row.push_back(format_number(m.mean()));
      row.push_back(format_number(m.ci95()));
    }
    s.rows.push_back(std::move(row));
  });
  return s;
}

}  // namespace gencom::runner
