// gencom: experiment runner and codec utilities.
//
//   gencom run configs/quality_sweep.yaml --threads 4
//   gencom sweep --snr -6:0:1 --config configs/quality_sweep.yaml
//   gencom plot results/trials.csv --kind coverage --out results/plots
//   gencom validate configs/quality_sweep.yaml
//   gencom compress in.pgm out.gcm --codec lpf --param 8
//   gencom decompress out.gcm restored.pgm
//   gencom ldpc-alist --n 1024
//
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 I/O error, 4 sidecar unavailable.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <string>

#include "gencom/codes.hpp"
#include "gencom/dct.hpp"
#include "gencom/image.hpp"
#include "gencom/lpf.hpp"
#include "gencom/runner/config.hpp"
#include "gencom/runner/experiment.hpp"
#include "gencom/runner/plots.hpp"

using namespace gencom;
using namespace gencom::runner;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kSidecar = 4 };

int run_config(ExperimentConfig cfg, unsigned threads, const std::string& out_dir) {
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  const auto res = run_experiment(cfg, {threads, {}});
  const auto files = write_outputs(res, cfg.output);
  std::printf("%zu trials -> %s\n", res.records.size(), files.trials.string().c_str());
  if (!files.summary.empty()) std::printf("summary -> %s\n", files.summary.string().c_str());
  if (res.sidecar_fallbacks) std::printf("sidecar fallbacks: %zu\n", res.sidecar_fallbacks);
  return kOk;
}

Image decompress(const CompressedImage& ci) {
  return ci.codec == CodecId::dct ? dct_decode(ci) : lpf_reconstruct(ci);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GenCom link-level experiments"};
  app.require_subcommand(1);
  unsigned threads = 0;
  std::string out_dir;
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "YAML config")->required();
  run->add_option("--threads,-j", threads, "worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "output directory (overrides the config)");

  std::string snr_range;
  auto* sweep = app.add_subcommand("sweep", "run a config over an SNR range");
  sweep->add_option("--snr", snr_range, "start:stop:step in dB")->required();
  sweep->add_option("--config", config_path, "YAML config (defaults built in)");
  std::size_t sweep_trials = 0;
  sweep->add_option("--trials", sweep_trials, "trials per point (overrides the config)");
  sweep->add_option("--threads,-j", threads, "worker threads (0 = all cores)");
  sweep->add_option("--out", out_dir, "output directory (overrides the config)");

  std::string table_path, kind;
  PlotOptions plot_opt;
  std::string plot_dir = "plots";
  auto* plot = app.add_subcommand("plot", "render figure data from a trials table");
  plot->add_option("table", table_path, "trials CSV")->required();
  plot->add_option("--kind", kind, "quality_vs_snr | flops_bar | coverage | retx_vs_snr")->required();
  plot->add_option("--out", plot_dir, "output directory");
  plot->add_option("--threshold", plot_opt.threshold_db, "coverage PSNR threshold in dB");
  plot->add_option("--baseline", plot_opt.baseline, "coverage reference scheme id");

  auto* validate_cmd = app.add_subcommand("validate", "check a config and print its normalized form");
  validate_cmd->add_option("config", config_path, "YAML config")->required();

  std::string in_path, out_path, codec = "lpf";
  int param = 8;
  auto* compress = app.add_subcommand("compress", "encode a PGM/PPM into a container");
  compress->add_option("input", in_path)->required();
  compress->add_option("output", out_path)->required();
  compress->add_option("--codec", codec, "lpf | dct")->check(CLI::IsMember({"lpf", "dct"}));
  compress->add_option("--param", param, "LPF block size or DCT quality");

  auto* decompress_cmd = app.add_subcommand("decompress", "decode a container into a PGM/PPM");
  decompress_cmd->add_option("input", in_path)->required();
  decompress_cmd->add_option("output", out_path)->required();

  std::size_t ldpc_n = 1024;
  std::uint64_t ldpc_seed = kDefaultLdpcSeed;
  auto* alist = app.add_subcommand("ldpc-alist", "print the parity-check matrix in alist format");
  alist->add_option("--n", ldpc_n, "code length");
  alist->add_option("--seed", ldpc_seed, "construction seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return run_config(load_config(config_path), threads, out_dir);
    if (*sweep) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      cfg.channel.snr_db = parse_snr_range(snr_range);
      if (sweep_trials) cfg.trials = sweep_trials;
      return run_config(cfg, threads, out_dir);
    }
    if (*plot) {
      const auto files = emit_plots(read_table(table_path), parse_plot_kind(kind), plot_dir, plot_opt);
      std::printf("%s\n%s\n", files.csv.string().c_str(), files.svg.string().c_str());
      return kOk;
    }
    if (*validate_cmd) {
      std::cout << to_yaml(load_config(config_path));
      return kOk;
    }
    if (*compress) {
      const Image img = load_image(in_path);
      const auto ci = codec == "lpf" ? lpf_encode(img, {static_cast<std::size_t>(param), ReconstructionMode::bilinear})
                                     : dct_encode(img, {param});
      write_file(out_path, serialize(ci));
      std::printf("%zu payload bytes\n", ci.payload.size());
      return kOk;
    }
    if (*decompress_cmd) {
      save_image(decompress(deserialize(read_file(in_path))), out_path);
      return kOk;
    }
    if (*alist) {
      std::cout << ldpc_instance(ldpc_n, ldpc_seed)->to_alist();
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const SidecarError& e) {
    std::fprintf(stderr, "sidecar unavailable: %s\n", e.what());
    return kSidecar;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
