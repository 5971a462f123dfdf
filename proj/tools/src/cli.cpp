// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol_tools/cli.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string_view>
#include <utility>

#include "CLI11.hpp"
#include "flol/bench.hpp"
#include "flol/dataset.hpp"
#include "flol/degradation.hpp"
#include "flol/eval.hpp"
#include "flol/image_io.hpp"
#include "flol/model.hpp"
#include "flol/report.hpp"
#include "flol/train.hpp"
#include "flol/weights.hpp"

namespace flol::cli {
namespace {

namespace fs = std::filesystem;

const std::set<std::string, std::less<>> kModelKeys = {
    "nc", "skip_mode", "fie_blocks", "ffn_expansion", "snr_blur", "map_epsilon", "snr_epsilon"};
const std::set<std::string, std::less<>> kOptimizerKeys = {
    "beta1",  "beta2", "adam_epsilon",      "lr_max",           "lr_min",
    "total_steps", "batch", "crop", "lambda_perceptual", "validation_every",
    "validation_fraction", "seed"};

// Carries an exit code through the command bodies to run().
struct CommandError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) {
  throw CommandError{code, std::move(message)};
}

RunConfig config_or_fail(const std::string& path) {
  try {
    return load_run_config(path);
  } catch (const ConfigError& e) {
    fail(kUsage, "config '" + path + "': " + e.what());
  }
}

WeightStore weights_or_fail(const std::string& path, const ModelConfig& cfg) {
  try {
    return load_weights(path, cfg);
  } catch (const WeightError& e) {
    fail(kWeightsMismatch, "weights '" + path + "': " + e.what());
  }
}

Tensor image_or_fail(const std::string& path) {
  try {
    return read_png(path);
  } catch (const ImageIoError& e) {
    fail(kUnreadableInput, e.what());
  }
}

DatasetLoad dataset_or_fail(const std::string& low, const std::string& high, std::ostream& err) {
  try {
    auto load = load_paired_dataset(low, high);
    for (const auto& w : load.warnings) err << "warning: " << w << '\n';
    return load;
  } catch (const DatasetError& e) {
    fail(kEmptyDataset, e.what());
  }
}

void write_image(const fs::path& path, const Tensor& image) {
  try {
    write_png(path, image);
  } catch (const ImageIoError& e) {
    fail(kFailure, e.what());
  }
}

void write_report_file(const std::string& path, const Report& report) {
  try {
    save_report(path, report);
  } catch (const ReportError& e) {
    fail(kFailure, e.what());
  }
}

// out.png -> out_<tag>.png next to it.
fs::path sibling(const fs::path& output, std::string_view tag) {
  fs::path p = output;
  p.replace_filename(output.stem().string() + "_" + std::string(tag) + output.extension().string());
  return p;
}

struct EnhanceArgs {
  std::string input, output, weights, config;
  bool emit_intermediates = false;
};

int cmd_enhance(const EnhanceArgs& a, std::ostream& out) {
  const auto cfg = config_or_fail(a.config);
  const auto weights = weights_or_fail(a.weights, cfg.model);
  const Tensor image = image_or_fail(a.input);
  const Model model(weights, cfg.model);
  const auto result = model.forward(as_batch(image));
  write_image(a.output, result.x_hat);
  out << "wrote " << a.output << '\n';
  if (a.emit_intermediates) {
    const auto lol = sibling(a.output, "x_lol");
    const auto snr = sibling(a.output, "snr");
    write_image(lol, result.x_lol);
    write_image(snr, result.snr.values);
    out << "wrote " << lol.string() << '\n' << "wrote " << snr.string() << '\n';
  }
  return kOk;
}

struct TrainArgs {
  std::string low_dir, high_dir, config, out;
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> seed;
  std::string log, init_weights;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = config_or_fail(a.config);
  if (a.steps) cfg.optimizer.total_steps = *a.steps;
  if (a.seed) cfg.optimizer.seed = *a.seed;
  try {
    cfg.optimizer.validate();
  } catch (const ConfigError& e) {
    fail(kUsage, e.what());
  }
  auto data = dataset_or_fail(a.low_dir, a.high_dir, err);

  TrainOptions opts;
  opts.model = cfg.model;
  opts.optimizer = cfg.optimizer;
  opts.weights_path = a.out;
  if (!a.log.empty()) opts.log_path = a.log;
  if (!a.init_weights.empty()) opts.initial_weights = weights_or_fail(a.init_weights, cfg.model);
  opts.on_record = [&out](const TrainRecord& r) {
    if (r.validation_psnr) {
      out << "step " << r.step << " loss " << format_double(r.total) << " val_psnr "
          << format_double(*r.validation_psnr) << '\n';
    }
  };
  try {
    const auto result = train_loop(data.pairs, opts);
    out << "best step " << result.best_step << " val_psnr "
        << format_double(result.best_validation_psnr) << ", weights written to " << a.out << '\n';
  } catch (const TrainingDivergence& e) {
    fail(kFailure, e.what());
  } catch (const WeightError& e) {
    fail(kFailure, e.what());
  }
  return kOk;
}

struct EvalArgs {
  std::string low_dir, high_dir, weights, config, report;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = config_or_fail(a.config);
  const auto weights = weights_or_fail(a.weights, cfg.model);
  const auto data = dataset_or_fail(a.low_dir, a.high_dir, err);
  const auto report = evaluate_dataset(data.pairs, weights, cfg.model);
  write_report_file(a.report, report.to_report());
  out << report.rows.size() << " images, mean psnr " << format_double(report.mean_psnr)
      << " ssim " << format_double(report.mean_ssim) << '\n';
  return kOk;
}

struct BenchArgs {
  std::string config, resolutions, report;
  int iters = 30;
  int warmup = 5;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto cfg = config_or_fail(a.config);
  BenchOptions opts;
  try {
    if (!a.resolutions.empty()) opts.resolutions = parse_resolutions(a.resolutions);
  } catch (const ConfigError& e) {
    fail(kUsage, e.what());
  }
  opts.iterations = a.iters;
  opts.warmup = a.warmup;
  opts.seed = a.seed;
  BenchReport report;
  try {
    report = run_bench(cfg.model, opts);
  } catch (const ConfigError& e) {
    fail(kUsage, e.what());
  }
  write_report_file(a.report, report.to_report());
  for (const auto& row : report.rows) {
    out << row.resolution.width << 'x' << row.resolution.height << "  " << row.flops_g
        << " GFLOPs  mean " << row.mean_ms << " ms  p50 " << row.p50_ms << " ms  p95 "
        << row.p95_ms << " ms\n";
  }
  return kOk;
}

struct SynthArgs {
  std::string out_dir;
  std::int64_t count = 64;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticSetOptions opts;
  opts.count = a.count;
  opts.seed = a.seed;
  const auto pairs = synthetic_pairs(opts);
  const fs::path root = a.out_dir;
  std::error_code ec;
  fs::create_directories(root / "low", ec);
  fs::create_directories(root / "high", ec);
  if (ec) fail(kFailure, "cannot create " + root.string() + ": " + ec.message());
  for (const auto& p : pairs) {
    write_image(root / "low" / (p.id + ".png"), p.low);
    write_image(root / "high" / (p.id + ".png"), p.high);
  }
  out << "wrote " << pairs.size() << " pairs to " << root.string() << '\n';
  return kOk;
}

struct InitArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  bool zero = false;
};

int cmd_init(const InitArgs& a, std::ostream& out) {
  const auto cfg = config_or_fail(a.config);
  const auto store = a.zero ? zero_weights(cfg.model) : init_weights(cfg.model, a.seed);
  try {
    save_weights(store, a.out);
  } catch (const WeightError& e) {
    fail(kFailure, e.what());
  }
  out << "wrote " << store.total_elements() << " parameters to " << a.out << '\n';
  return kOk;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  for (const auto& [key, value] : kv.values()) {
    if (!kModelKeys.contains(key) && !kOptimizerKeys.contains(key)) {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return RunConfig{model_config_from(kv), optimizer_config_from(kv)};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-domain low-light image enhancement"};
  app.require_subcommand(1);

  EnhanceArgs enhance;
  auto* sc = app.add_subcommand("enhance", "Enhance one PNG image");
  sc->add_option("--input", enhance.input, "Input PNG")->required();
  sc->add_option("--output", enhance.output, "Output PNG")->required();
  sc->add_option("--weights", enhance.weights, "Weight file")->required();
  sc->add_option("--config", enhance.config, "Config file")->required();
  sc->add_flag("--emit-intermediates", enhance.emit_intermediates,
               "Also write <output>_x_lol.png and <output>_snr.png");

  TrainArgs train;
  auto* tc = app.add_subcommand("train", "Train on a paired dataset");
  tc->add_option("--low-dir", train.low_dir)->required();
  tc->add_option("--high-dir", train.high_dir)->required();
  tc->add_option("--config", train.config)->required();
  tc->add_option("--out", train.out, "Best-by-validation weights")->required();
  tc->add_option("--steps", train.steps)->check(CLI::PositiveNumber);
  tc->add_option("--seed", train.seed);
  tc->add_option("--log", train.log, "Per-step TSV log");
  tc->add_option("--init-weights", train.init_weights, "Start from these weights");

  EvalArgs eval;
  auto* ec = app.add_subcommand("eval", "PSNR/SSIM over a paired dataset");
  ec->add_option("--low-dir", eval.low_dir)->required();
  ec->add_option("--high-dir", eval.high_dir)->required();
  ec->add_option("--weights", eval.weights)->required();
  ec->add_option("--config", eval.config)->required();
  ec->add_option("--report", eval.report)->required();

  BenchArgs bench;
  auto* bc = app.add_subcommand("bench", "Single-image latency per resolution");
  bc->add_option("--config", bench.config)->required();
  bc->add_option("--resolutions", bench.resolutions, "WxH,WxH,...");
  bc->add_option("--iters", bench.iters)->capture_default_str();
  bc->add_option("--warmup", bench.warmup)->capture_default_str();
  bc->add_option("--seed", bench.seed);
  bc->add_option("--report", bench.report)->required();

  SynthArgs synth;
  auto* yc = app.add_subcommand("synth", "Write synthetic low/high PNG pairs");
  yc->add_option("--out-dir", synth.out_dir)->required();
  yc->add_option("--count", synth.count)->check(CLI::PositiveNumber)->capture_default_str();
  yc->add_option("--seed", synth.seed);

  InitArgs init;
  auto* ic = app.add_subcommand("init", "Write freshly initialized weights");
  ic->add_option("--config", init.config)->required();
  ic->add_option("--out", init.out)->required();
  ic->add_option("--seed", init.seed);
  ic->add_flag("--zero", init.zero, "All-zero parameters");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (sc->parsed()) return cmd_enhance(enhance, out);
    if (tc->parsed()) return cmd_train(train, out, err);
    if (ec->parsed()) return cmd_eval(eval, out, err);
    if (bc->parsed()) return cmd_bench(bench, out);
    if (yc->parsed()) return cmd_synth(synth, out);
    if (ic->parsed()) return cmd_init(init, out);
  } catch (const CommandError& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace flol::cli
