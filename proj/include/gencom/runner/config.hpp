#pragma once

// Experiment configuration and its YAML form.
//
//   name: demo
//   seed: 1
//   trials: 20
//   images: [data/landscape.pgm, data/portrait.pgm, data/objects.pgm]
//   channel: {model: awgn, block_len: 64, snr_db: [-6, -4, -2, 0]}
//   schemes:
//     - {id: gencom, kind: gencom, lpf: {block_size: 8}, power: importance, decoder: inpaint}
//     - {id: baseline, kind: baseline, dct: {quality: 75}, code: {kind: ldpc, ldpc_n: 1024}}
//   output: {dir: results}
//
// Every key is optional. Unknown keys are rejected with their location.

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gencom/codes.hpp"
#include "gencom/dct.hpp"
#include "gencom/error.hpp"
#include "gencom/harq.hpp"
#include "gencom/interleaver.hpp"
#include "gencom/lpf.hpp"
#include "gencom/phy.hpp"
#include "gencom/semdec.hpp"

namespace gencom::runner {

struct SchemeConfig {
  enum class Kind { gencom, baseline };
  std::string id = "gencom";
  Kind kind = Kind::gencom;

  // gencom
  LpfConfig lpf{};
  CodeSpec code = CodeSpec::uncoded();
  InterleaverSpec interleaver{};
  PowerProfile power = PowerProfile::importance_default();
  HarqPolicy harq{};
  std::string decoder = "inpaint";  // upsample | inpaint | external

  // baseline (uses `code` and `harq.max_rounds` as well)
  DctConfig dct{};
  // When set, the DCT quality is chosen per image as the highest one whose
  // coded frame fits the named gencom scheme's first transmission.
  std::string match_bandwidth_of;

  bool operator==(const SchemeConfig& o) const {
    return id == o.id && kind == o.kind && lpf.block_size == o.lpf.block_size && lpf.mode == o.lpf.mode &&
           code == o.code && interleaver == o.interleaver && power == o.power && harq.kind == o.harq.kind &&
           harq.max_rounds == o.harq.max_rounds && harq.tau == o.harq.tau && harq.delta == o.harq.delta &&
           harq.ladder == o.harq.ladder && decoder == o.decoder && dct.quality == o.dct.quality &&
           match_bandwidth_of == o.match_bandwidth_of;
  }

  static SchemeConfig baseline() {
    SchemeConfig s;
    s.id = "baseline";
    s.kind = Kind::baseline;
    s.code = CodeSpec::ldpc(1024);
    s.harq.kind = HarqPolicy::Kind::crc_based;
    s.power = PowerProfile::uniform();
    return s;
  }
};

struct ChannelSweep {
  ChannelConfig::Model model = ChannelConfig::Model::awgn;
  std::size_t block_len = 64;
  std::vector<double> snr_db = {-6, -5, -4, -3, -2, -1, 0};

  bool operator==(const ChannelSweep&) const = default;
};

struct OutputConfig {
  std::string dir = "results";
  std::string trials = "trials.csv";
  std::string summary = "summary.csv";
  std::string timing = "timing.csv";
  std::string harq_trace;  // JSON lines per round; empty disables

  bool operator==(const OutputConfig&) const = default;
};

struct SidecarConfig {
  std::string address;  // host:port; empty = environment or default
  int timeout_ms = 30000;
  int connect_timeout_ms = 2000;
  bool fallback = true;
  int max_in_flight = 16;

  bool operator==(const SidecarConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::vector<std::string> images = {"data/landscape.pgm", "data/portrait.pgm", "data/objects.pgm"};
  ChannelSweep channel{};
  std::vector<SchemeConfig> schemes = {SchemeConfig{}, SchemeConfig::baseline()};
  InpaintOptions inpaint{};
  SidecarConfig sidecar{};
  OutputConfig output{};

  bool operator==(const ExperimentConfig& o) const {
    return name == o.name && seed == o.seed && trials == o.trials && images == o.images && channel == o.channel &&
           schemes == o.schemes && inpaint.max_passes == o.inpaint.max_passes && inpaint.delta == o.inpaint.delta &&
           sidecar == o.sidecar && output == o.output;
  }

  const SchemeConfig* find_scheme(const std::string& id) const {
    for (const auto& s : schemes)
      if (s.id == id) return &s;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Validation

inline void validate(const ExperimentConfig& c) {
  if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (c.images.empty()) throw ConfigError("images", "at least one image is required");
  if (c.channel.snr_db.empty()) throw ConfigError("channel.snr_db", "at least one SNR point is required");
  if (c.channel.block_len < 1) throw ConfigError("channel.block_len", "must be >= 1");
  if (c.schemes.empty()) throw ConfigError("schemes", "at least one scheme is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.schemes.size(); ++i) {
    const auto& s = c.schemes[i];
    const std::string at = "schemes[" + std::to_string(i) + "]";
    if (s.id.empty() || s.id.find_first_of(",\"\n\r") != std::string::npos)
      throw ConfigError(at + ".id", "must be non-empty and free of commas, quotes and newlines");
    if (!ids.insert(s.id).second) throw ConfigError(at + ".id", "duplicate scheme id '" + s.id + "'");
    if (s.harq.max_rounds < 1) throw ConfigError(at + ".harq.max_rounds", "must be >= 1");
    if (s.code.kind == CodeSpec::Kind::repetition && s.code.repetition < 1)
      throw ConfigError(at + ".code.repetition", "must be >= 1");
    if (s.code.kind == CodeSpec::Kind::ldpc && (s.code.ldpc_n < 8 || s.code.ldpc_n % 2))
      throw ConfigError(at + ".code.ldpc_n", "must be even and >= 8");
    if (s.kind == SchemeConfig::Kind::gencom) {
      if (s.lpf.block_size < 1 || s.lpf.block_size > 255) throw ConfigError(at + ".lpf.block_size", "must lie in [1, 255]");
      if (!(s.harq.tau > 0.0 && s.harq.tau < 1.0)) throw ConfigError(at + ".harq.tau", "must lie in (0, 1)");
      if (s.harq.ladder.empty()) throw ConfigError(at + ".harq.ladder", "must not be empty");
      if (s.decoder != "upsample" && s.decoder != "inpaint" && s.decoder != "external")
        throw ConfigError(at + ".decoder", "unknown decoder '" + s.decoder + "'");
      for (double w : s.power.weights)
        if (!(w > 0.0)) throw ConfigError(at + ".power", "weights must be positive");
    } else {
      if (s.dct.quality < 1 || s.dct.quality > 100) throw ConfigError(at + ".dct.quality", "must lie in [1, 100]");
      if (!s.match_bandwidth_of.empty()) {
        const auto* ref = c.find_scheme(s.match_bandwidth_of);
        if (!ref || ref->kind != SchemeConfig::Kind::gencom)
          throw ConfigError(at + ".dct.match_bandwidth_of", "'" + s.match_bandwidth_of + "' is not a gencom scheme");
      }
    }
  }
  if (c.inpaint.max_passes < 0) throw ConfigError("inpaint.max_passes", "must be >= 0");
  if (c.sidecar.timeout_ms < 1) throw ConfigError("sidecar.timeout_ms", "must be >= 1");
  if (c.sidecar.connect_timeout_ms < 1) throw ConfigError("sidecar.connect_timeout_ms", "must be >= 1");
  if (c.sidecar.max_in_flight < 1) throw ConfigError("sidecar.max_in_flight", "must be >= 1");
  if (c.output.trials.empty()) throw ConfigError("output.trials", "must not be empty");
}

// ---------------------------------------------------------------------------
// YAML

namespace config_detail {

inline std::string locate(const std::string& path, const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return path;
  return path + " (line " + std::to_string(m.line + 1) + ")";
}

inline void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) throw ConfigError(locate(path, n), "expected a mapping");
}

inline void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_map(n, path);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(locate(path.empty() ? key : path + "." + key, kv.first), "unknown key");
  }
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

template <class T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(locate(path, n), "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(locate(path, n), "cannot convert '" + n.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
  if (const auto n = parent[key]) out = scalar<T>(n, join(path, key));
}

inline std::size_t read_size(const YAML::Node& n, const std::string& path) {
  const auto text = scalar<std::string>(n, path);
  if (!text.empty() && text.front() == '-') throw ConfigError(locate(path, n), "must be non-negative");
  return static_cast<std::size_t>(scalar<unsigned long long>(n, path));
}

inline void read(const YAML::Node& parent, const std::string& path, const char* key, std::size_t& out) {
  if (const auto n = parent[key]) out = read_size(n, join(path, key));
}

template <class E, std::size_t N>
E enum_value(const YAML::Node& n, const std::string& path, const std::pair<const char*, E> (&names)[N]) {
  const auto s = scalar<std::string>(n, path);
  for (const auto& [name, v] : names)
    if (s == name) return v;
  std::string valid;
  for (const auto& [name, v] : names) valid += (valid.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(locate(path, n), "unknown value '" + s + "' (expected one of: " + valid + ")");
}

template <class E, std::size_t N>
const char* enum_name(E v, const std::pair<const char*, E> (&names)[N]) {
  for (const auto& [name, x] : names)
    if (x == v) return name;
  return "?";
}

inline constexpr std::pair<const char*, SchemeConfig::Kind> kSchemeKinds[] = {{"gencom", SchemeConfig::Kind::gencom},
                                                                              {"baseline", SchemeConfig::Kind::baseline}};
inline constexpr std::pair<const char*, CodeSpec::Kind> kCodeKinds[] = {{"uncoded", CodeSpec::Kind::uncoded},
                                                                        {"repetition", CodeSpec::Kind::repetition},
                                                                        {"hamming74", CodeSpec::Kind::hamming74},
                                                                        {"convolutional", CodeSpec::Kind::convolutional},
                                                                        {"ldpc", CodeSpec::Kind::ldpc}};
inline constexpr std::pair<const char*, InterleaverSpec::Kind> kInterleaverKinds[] = {
    {"none", InterleaverSpec::Kind::none}, {"block", InterleaverSpec::Kind::block}, {"random", InterleaverSpec::Kind::random}};
inline constexpr std::pair<const char*, ReconstructionMode> kModes[] = {{"replicate", ReconstructionMode::replicate},
                                                                        {"bilinear", ReconstructionMode::bilinear}};
inline constexpr std::pair<const char*, HarqPolicy::Kind> kHarqKinds[] = {{"crc_based", HarqPolicy::Kind::crc_based},
                                                                          {"semantic_aware", HarqPolicy::Kind::semantic_aware}};
inline constexpr std::pair<const char*, FallbackStep> kSteps[] = {{"chase", FallbackStep::chase},
                                                                  {"recompress", FallbackStep::recompress}};
inline constexpr std::pair<const char*, ChannelConfig::Model> kModels[] = {
    {"awgn", ChannelConfig::Model::awgn}, {"rayleigh_block", ChannelConfig::Model::rayleigh_block}};

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::vector<double> read_doubles(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(locate(path, n), "expected a list");
  std::vector<double> v;
  for (std::size_t i = 0; i < n.size(); ++i) v.push_back(scalar<double>(n[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

inline CodeSpec read_code(const YAML::Node& n, const std::string& path, CodeSpec c) {
  check_keys(n, path, {"kind", "repetition", "ldpc_n", "ldpc_seed"});
  if (const auto k = n["kind"]) c.kind = enum_value(k, path + ".kind", kCodeKinds);
  read(n, path, "repetition", c.repetition);
  read(n, path, "ldpc_n", c.ldpc_n);
  read(n, path, "ldpc_seed", c.ldpc_seed);
  return c;
}

inline PowerProfile read_power(const YAML::Node& n, const std::string& path) {
  if (n.IsSequence()) return PowerProfile{read_doubles(n, path)};
  const auto s = scalar<std::string>(n, path);
  if (s == "importance") return PowerProfile::importance_default();
  if (s == "uniform") return PowerProfile::uniform();
  throw ConfigError(locate(path, n), "expected 'importance', 'uniform' or a list of weights");
}

inline SchemeConfig read_scheme(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  SchemeConfig s;
  if (const auto k = n["kind"]) s.kind = enum_value(k, path + ".kind", kSchemeKinds);
  if (s.kind == SchemeConfig::Kind::baseline) {
    s = SchemeConfig::baseline();
    check_keys(n, path, {"id", "kind", "dct", "code", "harq"});
    read(n, path, "id", s.id);
    if (const auto d = n["dct"]) {
      check_keys(d, path + ".dct", {"quality", "match_bandwidth_of"});
      read(d, path + ".dct", "quality", s.dct.quality);
      read(d, path + ".dct", "match_bandwidth_of", s.match_bandwidth_of);
    }
    if (const auto c = n["code"]) s.code = read_code(c, path + ".code", s.code);
    if (const auto h = n["harq"]) {
      check_keys(h, path + ".harq", {"max_rounds"});
      read(h, path + ".harq", "max_rounds", s.harq.max_rounds);
    }
    return s;
  }
  check_keys(n, path, {"id", "kind", "lpf", "code", "interleaver", "power", "harq", "decoder"});
  read(n, path, "id", s.id);
  read(n, path, "decoder", s.decoder);
  if (const auto l = n["lpf"]) {
    check_keys(l, path + ".lpf", {"block_size", "mode"});
    read(l, path + ".lpf", "block_size", s.lpf.block_size);
    if (const auto m = l["mode"]) s.lpf.mode = enum_value(m, path + ".lpf.mode", kModes);
  }
  if (const auto c = n["code"]) s.code = read_code(c, path + ".code", s.code);
  if (const auto i = n["interleaver"]) {
    const std::string p = path + ".interleaver";
    check_keys(i, p, {"kind", "rows", "cols", "seed"});
    if (const auto k = i["kind"]) s.interleaver.kind = enum_value(k, p + ".kind", kInterleaverKinds);
    read(i, p, "rows", s.interleaver.rows);
    read(i, p, "cols", s.interleaver.cols);
    read(i, p, "seed", s.interleaver.seed);
  }
  if (const auto p = n["power"]) s.power = read_power(p, path + ".power");
  if (const auto h = n["harq"]) {
    const std::string p = path + ".harq";
    check_keys(h, p, {"kind", "max_rounds", "tau", "delta", "ladder"});
    if (const auto k = h["kind"]) s.harq.kind = enum_value(k, p + ".kind", kHarqKinds);
    read(h, p, "max_rounds", s.harq.max_rounds);
    read(h, p, "tau", s.harq.tau);
    read(h, p, "delta", s.harq.delta);
    if (const auto l = h["ladder"]) {
      if (!l.IsSequence()) throw ConfigError(locate(p + ".ladder", l), "expected a list");
      s.harq.ladder.clear();
      for (std::size_t i = 0; i < l.size(); ++i)
        s.harq.ladder.push_back(enum_value(l[i], p + ".ladder[" + std::to_string(i) + "]", kSteps));
    }
  }
  return s;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const std::string& text) {
  using namespace config_detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1), e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "", {"name", "seed", "trials", "images", "channel", "schemes", "inpaint", "sidecar", "output"});
  read(root, "", "name", c.name);
  read(root, "", "seed", c.seed);
  read(root, "", "trials", c.trials);
  if (const auto im = root["images"]) {
    if (!im.IsSequence()) throw ConfigError(locate("images", im), "expected a list");
    c.images.clear();
    for (std::size_t i = 0; i < im.size(); ++i) c.images.push_back(scalar<std::string>(im[i], "images[" + std::to_string(i) + "]"));
  }
  if (const auto ch = root["channel"]) {
    check_keys(ch, "channel", {"model", "block_len", "snr_db"});
    if (const auto m = ch["model"]) c.channel.model = enum_value(m, "channel.model", kModels);
    read(ch, "channel", "block_len", c.channel.block_len);
    if (const auto s = ch["snr_db"]) c.channel.snr_db = read_doubles(s, "channel.snr_db");
  }
  if (const auto sc = root["schemes"]) {
    if (!sc.IsSequence()) throw ConfigError(locate("schemes", sc), "expected a list");
    c.schemes.clear();
    for (std::size_t i = 0; i < sc.size(); ++i) c.schemes.push_back(read_scheme(sc[i], "schemes[" + std::to_string(i) + "]"));
  }
  if (const auto ip = root["inpaint"]) {
    check_keys(ip, "inpaint", {"max_passes", "delta"});
    read(ip, "inpaint", "max_passes", c.inpaint.max_passes);
    read(ip, "inpaint", "delta", c.inpaint.delta);
  }
  if (const auto sd = root["sidecar"]) {
    check_keys(sd, "sidecar", {"address", "timeout_ms", "connect_timeout_ms", "fallback", "max_in_flight"});
    read(sd, "sidecar", "address", c.sidecar.address);
    read(sd, "sidecar", "timeout_ms", c.sidecar.timeout_ms);
    read(sd, "sidecar", "connect_timeout_ms", c.sidecar.connect_timeout_ms);
    read(sd, "sidecar", "fallback", c.sidecar.fallback);
    read(sd, "sidecar", "max_in_flight", c.sidecar.max_in_flight);
  }
  if (const auto o = root["output"]) {
    check_keys(o, "output", {"dir", "trials", "summary", "timing", "harq_trace"});
    read(o, "output", "dir", c.output.dir);
    read(o, "output", "trials", c.output.trials);
    read(o, "output", "summary", c.output.summary);
    read(o, "output", "timing", c.output.timing);
    read(o, "output", "harq_trace", c.output.harq_trace);
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string to_yaml(const ExperimentConfig& c) {
  using namespace config_detail;
  YAML::Emitter e;
  auto dbl = [&e](double v) { e << format_double(v); };
  auto code = [&](const CodeSpec& s) {
    e << YAML::Key << "code" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << enum_name(s.kind, kCodeKinds);
    e << YAML::Key << "repetition" << YAML::Value << s.repetition;
    e << YAML::Key << "ldpc_n" << YAML::Value << s.ldpc_n;
    e << YAML::Key << "ldpc_seed" << YAML::Value << s.ldpc_seed;
    e << YAML::EndMap;
  };
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "trials" << YAML::Value << c.trials;
  e << YAML::Key << "images" << YAML::Value << YAML::BeginSeq;
  for (const auto& im : c.images) e << YAML::DoubleQuoted << im;
  e << YAML::EndSeq;

  e << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "model" << YAML::Value << enum_name(c.channel.model, kModels);
  e << YAML::Key << "block_len" << YAML::Value << c.channel.block_len;
  e << YAML::Key << "snr_db" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double s : c.channel.snr_db) dbl(s);
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "schemes" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.schemes) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << s.id;
    e << YAML::Key << "kind" << YAML::Value << enum_name(s.kind, kSchemeKinds);
    if (s.kind == SchemeConfig::Kind::baseline) {
      e << YAML::Key << "dct" << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "quality" << YAML::Value << s.dct.quality;
      e << YAML::Key << "match_bandwidth_of" << YAML::Value << YAML::DoubleQuoted << s.match_bandwidth_of;
      e << YAML::EndMap;
      code(s.code);
      e << YAML::Key << "harq" << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "max_rounds" << YAML::Value << s.harq.max_rounds;
      e << YAML::EndMap << YAML::EndMap;
      continue;
    }
    e << YAML::Key << "lpf" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "block_size" << YAML::Value << s.lpf.block_size;
    e << YAML::Key << "mode" << YAML::Value << enum_name(s.lpf.mode, kModes);
    e << YAML::EndMap;
    code(s.code);
    e << YAML::Key << "interleaver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << enum_name(s.interleaver.kind, kInterleaverKinds);
    e << YAML::Key << "rows" << YAML::Value << s.interleaver.rows;
    e << YAML::Key << "cols" << YAML::Value << s.interleaver.cols;
    e << YAML::Key << "seed" << YAML::Value << s.interleaver.seed;
    e << YAML::EndMap;
    e << YAML::Key << "power" << YAML::Value;
    if (s.power == PowerProfile::importance_default()) {
      e << "importance";
    } else if (s.power.is_uniform()) {
      e << "uniform";
    } else {
      e << YAML::Flow << YAML::BeginSeq;
      for (double w : s.power.weights) dbl(w);
      e << YAML::EndSeq;
    }
    e << YAML::Key << "harq" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << enum_name(s.harq.kind, kHarqKinds);
    e << YAML::Key << "max_rounds" << YAML::Value << s.harq.max_rounds;
    e << YAML::Key << "tau" << YAML::Value;
    dbl(s.harq.tau);
    e << YAML::Key << "delta" << YAML::Value << s.harq.delta;
    e << YAML::Key << "ladder" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto st : s.harq.ladder) e << enum_name(st, kSteps);
    e << YAML::EndSeq << YAML::EndMap;
    e << YAML::Key << "decoder" << YAML::Value << s.decoder;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "inpaint" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_passes" << YAML::Value << c.inpaint.max_passes;
  e << YAML::Key << "delta" << YAML::Value << c.inpaint.delta;
  e << YAML::EndMap;

  e << YAML::Key << "sidecar" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "address" << YAML::Value << YAML::DoubleQuoted << c.sidecar.address;
  e << YAML::Key << "timeout_ms" << YAML::Value << c.sidecar.timeout_ms;
  e << YAML::Key << "connect_timeout_ms" << YAML::Value << c.sidecar.connect_timeout_ms;
  e << YAML::Key << "fallback" << YAML::Value << c.sidecar.fallback;
  e << YAML::Key << "max_in_flight" << YAML::Value << c.sidecar.max_in_flight;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << c.output.dir;
  e << YAML::Key << "trials" << YAML::Value << YAML::DoubleQuoted << c.output.trials;
  e << YAML::Key << "summary" << YAML::Value << YAML::DoubleQuoted << c.output.summary;
  e << YAML::Key << "timing" << YAML::Value << YAML::DoubleQuoted << c.output.timing;
  e << YAML::Key << "harq_trace" << YAML::Value << YAML::DoubleQuoted << c.output.harq_trace;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

// "a:b:step" -> {a, a+step, ..., <= b}. Points are computed as a + i*step.
inline std::vector<double> parse_snr_range(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = spec.find(':', pos);
    const std::string tok = spec.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    double v = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
      throw ConfigError("--snr", "cannot parse '" + tok + "' in '" + spec + "'");
    parts.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 3) throw ConfigError("--snr", "expected a:b:step, got '" + spec + "'");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0)) throw ConfigError("--snr", "step must be positive");
  if (b < a) throw ConfigError("--snr", "end must not be below start");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = a + static_cast<double>(i) * step;
    if (v > b + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace gencom::runner
