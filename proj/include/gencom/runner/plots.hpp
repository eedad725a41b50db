#pragma once

// Figure data from a trials table: one CSV and one SVG per panel.
//
//   quality_vs_snr  mean PSNR per scheme over Es/N0
//   flops_bar       transmitter FLOPs per scheme
//   coverage        PSNR curves, threshold line and the coverage extension
//   retx_vs_snr     mean retransmission rounds per scheme over Es/N0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/metrics.hpp"
#include "gencom/runner/table.hpp"

namespace gencom::runner {

enum class PlotKind { quality_vs_snr, flops_bar, coverage, retx_vs_snr };

inline std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::quality_vs_snr: return "quality_vs_snr";
    case PlotKind::flops_bar: return "flops_bar";
    case PlotKind::coverage: return "coverage";
    case PlotKind::retx_vs_snr: return "retx_vs_snr";
  }
  return "?";
}

inline PlotKind parse_plot_kind(const std::string& s) {
  for (auto k : {PlotKind::quality_vs_snr, PlotKind::flops_bar, PlotKind::coverage, PlotKind::retx_vs_snr})
    if (to_string(k) == s) return k;
  throw ConfigError("--kind", "unknown plot kind '" + s + "' (quality_vs_snr, flops_bar, coverage, retx_vs_snr)");
}

inline std::vector<std::string> required_columns(PlotKind k) {
  switch (k) {
    case PlotKind::quality_vs_snr: return {"scheme", "snr_db", "psnr", "ssim"};
    case PlotKind::flops_bar: return {"scheme", "flops_tx"};
    case PlotKind::coverage: return {"scheme", "snr_db", "psnr", "decoder"};
    case PlotKind::retx_vs_snr: return {"scheme", "snr_db", "retx_rounds"};
  }
  return {};
}

struct PlotOptions {
  double threshold_db = 22.0;  // coverage: PSNR threshold
  std::string baseline;        // coverage: reference scheme; empty = first scheme decoded by "dct"
};

struct PlotData {
  std::string csv;
  std::string svg;
};

namespace plot_detail {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

inline const char* color(std::size_t i) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return kColors[i % 7];
}

inline std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else o += c;
  }
  return o;
}

// Roughly five round tick values covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  return t;
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
  double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

inline std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n<rect width=\"640\" height=\"420\" fill=\"white\"/>\n<text x=\"320\" y=\"22\" "
         "text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel, bool x_ticks = true) {
  std::string s;
  s += "<line x1=\"" + num(Frame::L) + "\" y1=\"" + num(Frame::H - Frame::B) + "\" x2=\"" + num(Frame::W - Frame::R) +
       "\" y2=\"" + num(Frame::H - Frame::B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(Frame::L) + "\" y1=\"" + num(Frame::T) + "\" x2=\"" + num(Frame::L) + "\" y2=\"" +
       num(Frame::H - Frame::B) + "\" stroke=\"black\"/>\n";
  if (x_ticks)
    for (double t : ticks(f.x0, f.x1))
      s += "<text x=\"" + num(f.px(t), 6) + "\" y=\"" + num(Frame::H - Frame::B + 16) + "\" text-anchor=\"middle\">" +
           num(t) + "</text>\n";
  for (double t : ticks(f.y0, f.y1))
    s += "<text x=\"" + num(Frame::L - 6) + "\" y=\"" + num(f.py(t) + 4, 6) + "\" text-anchor=\"end\">" + num(t) +
         "</text>\n<line x1=\"" + num(Frame::L) + "\" y1=\"" + num(f.py(t), 6) + "\" x2=\"" +
         num(Frame::W - Frame::R) + "\" y2=\"" + num(f.py(t), 6) + "\" stroke=\"#e0e0e0\"/>\n";
  s += "<text class=\"xlabel\" x=\"" + num((Frame::L + Frame::W - Frame::R) / 2) + "\" y=\"" + num(Frame::H - 12) +
       "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  s += "<text class=\"ylabel\" transform=\"translate(16," + num((Frame::T + Frame::H - Frame::B) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  return s;
}

inline std::string legend(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = Frame::T + 8 + 16 * static_cast<double>(i);
    s += "<rect x=\"" + num(Frame::W - Frame::R - 150) + "\" y=\"" + num(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
         color(i) + "\"/>\n<text x=\"" + num(Frame::W - Frame::R - 135) + "\" y=\"" + num(y + 1) + "\">" +
         escape(names[i]) + "</text>\n";
  }
  return s;
}

inline Frame fit(const std::vector<Series>& series, std::optional<double> extra_y = std::nullopt) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (extra_y) {
    y0 = std::min(y0, *extra_y);
    y1 = std::max(y1, *extra_y);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

inline std::string lines(const Frame& f, const std::vector<Series>& series) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    s += "<polyline class=\"series\" data-name=\"" + escape(series[i].name) + "\" fill=\"none\" stroke=\"" + color(i) +
         "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < series[i].x.size(); ++k)
      s += (k ? " " : "") + num(f.px(series[i].x[k]), 6) + "," + num(f.py(series[i].y[k]), 6);
    s += "\"/>\n";
    for (std::size_t k = 0; k < series[i].x.size(); ++k)
      s += "<circle cx=\"" + num(f.px(series[i].x[k]), 6) + "\" cy=\"" + num(f.py(series[i].y[k]), 6) +
           "\" r=\"3\" fill=\"" + color(i) + "\"/>\n";
  }
  return s;
}

struct PointStats {
  std::string scheme;
  double snr_db;
  std::size_t n;
  Moments m;
};

// Per-(scheme, snr) moments of one column, in table order.
inline std::vector<PointStats> per_point(const Table& t, const std::string& column, bool cap_psnr) {
  std::vector<PointStats> out;
  const auto col = t.column(column);
  for_each_group(t, [&](const GroupKey& k, const std::vector<std::size_t>& rows) {
    out.push_back({k.scheme, k.snr_db, rows.size(), column_moments(t, col, rows, cap_psnr)});
  });
  return out;
}

// One series per scheme, points sorted by SNR.
inline std::vector<Series> to_series(const std::vector<PointStats>& pts) {
  std::vector<Series> out;
  for (const auto& p : pts) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Series& s) { return s.name == p.scheme; });
    if (it == out.end()) {
      out.push_back({p.scheme, {}, {}});
      it = std::prev(out.end());
    }
    it->x.push_back(p.snr_db);
    it->y.push_back(p.m.mean());
  }
  for (auto& s : out) {
    std::vector<std::size_t> idx(s.x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
    Series sorted{s.name, {}, {}};
    for (auto i : idx) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
    }
    s = std::move(sorted);
  }
  return out;
}

inline constexpr const char* kSnrLabel = "Es/N0 (dB)";

inline PlotData quality(const Table& t) {
  const auto psnr = per_point(t, "psnr", true);
  const auto ssim = per_point(t, "ssim", false);
  PlotData d;
  d.csv = "scheme,snr_db,n,psnr_mean,psnr_ci95,ssim_mean,ssim_ci95\n";
  for (std::size_t i = 0; i < psnr.size(); ++i)
    d.csv += psnr[i].scheme + "," + format_number(psnr[i].snr_db) + "," + std::to_string(psnr[i].n) + "," +
             format_number(psnr[i].m.mean()) + "," + format_number(psnr[i].m.ci95()) + "," +
             format_number(ssim[i].m.mean()) + "," + format_number(ssim[i].m.ci95()) + "\n";
  const auto series = to_series(psnr);
  const auto f = fit(series);
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  d.svg = svg_open("Reconstructed image quality") + axes(f, kSnrLabel, "PSNR (dB)") + lines(f, series) + legend(names) +
          "</svg>\n";
  return d;
}

inline PlotData retx(const Table& t) {
  const auto pts = per_point(t, "retx_rounds", false);
  PlotData d;
  d.csv = "scheme,snr_db,n,retx_mean,retx_ci95\n";
  for (const auto& p : pts)
    d.csv += p.scheme + "," + format_number(p.snr_db) + "," + std::to_string(p.n) + "," + format_number(p.m.mean()) +
             "," + format_number(p.m.ci95()) + "\n";
  const auto series = to_series(pts);
  const auto f = fit(series, 0.0);
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  d.svg = svg_open("Retransmissions") + axes(f, kSnrLabel, "mean retransmission rounds") + lines(f, series) +
          legend(names) + "</svg>\n";
  return d;
}

inline PlotData flops(const Table& t) {
  const auto col = t.column("flops_tx");
  const auto sc = t.column("scheme");
  std::vector<std::pair<std::string, Moments>> bars;
  for (const auto& row : t.rows) {
    auto it = std::find_if(bars.begin(), bars.end(), [&](const auto& b) { return b.first == row[sc]; });
    if (it == bars.end()) {
      bars.push_back({row[sc], {}});
      it = std::prev(bars.end());
    }
    if (auto v = parse_number(row[col])) it->second.add(*v);
  }
  PlotData d;
  d.csv = "scheme,flops_tx\n";
  double top = 0.0;
  for (const auto& [name, m] : bars) {
    d.csv += name + "," + format_number(m.mean()) + "\n";
    top = std::max(top, m.mean());
  }
  Frame f{0.0, static_cast<double>(bars.size()), 0.0, top > 0 ? top * 1.1 : 1.0};
  d.svg = svg_open("Transmitter complexity") + axes(f, "scheme", "FLOPs per image", false);
  const double slot = (Frame::W - Frame::L - Frame::R) / static_cast<double>(std::max<std::size_t>(1, bars.size()));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = bars[i].second.mean();
    const double x = Frame::L + slot * (static_cast<double>(i) + 0.2);
    d.svg += "<rect class=\"bar\" data-name=\"" + escape(bars[i].first) + "\" data-value=\"" + format_number(v) +
             "\" x=\"" + num(x, 6) + "\" y=\"" + num(f.py(v), 6) + "\" width=\"" + num(slot * 0.6, 6) +
             "\" height=\"" + num(f.py(0.0) - f.py(v), 6) + "\" fill=\"" + color(i) + "\"/>\n";
    d.svg += "<text x=\"" + num(x + slot * 0.3, 6) + "\" y=\"" + num(Frame::H - Frame::B + 16) +
             "\" text-anchor=\"middle\">" + escape(bars[i].first) + "</text>\n";
  }
  d.svg += "</svg>\n";
  return d;
}

inline PlotData coverage_plot(const Table& t, const PlotOptions& opt) {
  const auto pts = per_point(t, "psnr", true);
  const auto series = to_series(pts);
  std::string baseline = opt.baseline;
  if (baseline.empty()) {
    const auto sc = t.column("scheme"), dc = t.column("decoder");
    for (const auto& row : t.rows)
      if (row[dc] == "dct") {
        baseline = row[sc];
        break;
      }
    if (baseline.empty()) throw FormatError("coverage: no scheme decoded by 'dct'; name the baseline explicitly");
  }
  std::size_t base_idx = series.size();
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].name == baseline) base_idx = i;
  if (base_idx == series.size()) throw FormatError("coverage: baseline scheme '" + baseline + "' not in table");

  auto min_snr = [&](const Series& s, bool* nm) -> std::optional<double> {
    try {
      return min_usable_snr({s.name, s.x, s.y}, opt.threshold_db, nm);
    } catch (const CoverageUndefined&) {
      return std::nullopt;
    }
  };
  bool base_nm = false;
  const auto base = min_snr(series[base_idx], &base_nm);

  PlotData d;
  d.csv = "scheme,baseline,threshold_db,min_usable_snr_db,extension_db,non_monotone\n";
  std::string notes;
  double note_y = Frame::T + 8 + 16 * static_cast<double>(series.size()) + 12;
  for (const auto& s : series) {
    bool nm = false;
    const auto m = min_snr(s, &nm);
    std::optional<double> ext;
    if (m && base) ext = *base - *m;
    d.csv += s.name + "," + baseline + "," + format_number(opt.threshold_db) + "," +
             (m ? format_number(*m) : std::string()) + "," + (ext ? format_number(*ext) : std::string()) + "," +
             (nm ? "1" : "0") + "\n";
    if (s.name == baseline) continue;
    notes += "<text class=\"extension\" data-scheme=\"" + escape(s.name) + "\" data-extension-db=\"" +
             (ext ? format_number(*ext) : std::string()) + "\" x=\"" + num(Frame::W - Frame::R - 150) + "\" y=\"" +
             num(note_y) + "\">" + escape(s.name) + ": extension_db = " + (ext ? num(*ext, 3) + " dB" : "n/a") +
             "</text>\n";
    note_y += 16;
  }
  const auto f = fit(series, opt.threshold_db);
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  d.svg = svg_open("Coverage at PSNR " + num(opt.threshold_db) + " dB") + axes(f, kSnrLabel, "PSNR (dB)") +
          "<line class=\"threshold\" x1=\"" + num(Frame::L) + "\" y1=\"" + num(f.py(opt.threshold_db), 6) + "\" x2=\"" +
          num(Frame::W - Frame::R) + "\" y2=\"" + num(f.py(opt.threshold_db), 6) +
          "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n" + lines(f, series) + legend(names) + notes + "</svg>\n";
  return d;
}

}  // namespace plot_detail

inline PlotData render_plot(const Table& t, PlotKind kind, const PlotOptions& opt = {}) {
  t.require(required_columns(kind));
  if (t.rows.empty()) throw FormatError("empty table: nothing to plot");
  switch (kind) {
    case PlotKind::quality_vs_snr: return plot_detail::quality(t);
    case PlotKind::flops_bar: return plot_detail::flops(t);
    case PlotKind::coverage: return plot_detail::coverage_plot(t, opt);
    case PlotKind::retx_vs_snr: return plot_detail::retx(t);
  }
  return {};
}

struct PlotFiles {
  std::filesystem::path csv, svg;
};

inline PlotFiles emit_plots(const Table& t, PlotKind kind, const std::filesystem::path& out_dir, const PlotOptions& opt = {}) {
  const auto d = render_plot(t, kind, opt);
  PlotFiles f{out_dir / (to_string(kind) + ".csv"), out_dir / (to_string(kind) + ".svg")};
  write_text(f.csv, d.csv);
  write_text(f.svg, d.svg);
  return f;
}

}  // namespace gencom::runner
