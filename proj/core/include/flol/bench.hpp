// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flol/config.hpp"
#include "flol/report.hpp"

namespace flol {

struct Resolution {
  std::int64_t width = 0;
  std::int64_t height = 0;
  bool operator==(const Resolution&) const = default;
};

/// The four latency study sizes: 640x480, 1280x720, 1920x1080, 2560x1440.
std::vector<Resolution> default_bench_resolutions();

/// "WxH,WxH,..." -> list; throws ConfigError on malformed text.
std::vector<Resolution> parse_resolutions(std::string_view text);

struct BenchOptions {
  std::vector<Resolution> resolutions = default_bench_resolutions();
  int warmup = 5;
  int iterations = 30;
  std::uint64_t seed = 0;
};

struct BenchRow {
  Resolution resolution;
  std::uint64_t flops = 0;
  double flops_g = 0.0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  int iterations = 0;
  std::vector<double> samples_ms;  // not serialized
};

struct BenchEnvironment {
  std::string cpu_model;
  int threads = 1;
  std::string mode = "single-threaded";
  std::string build_flags;
  int warmup = 0;
};

struct BenchReport {
  BenchEnvironment environment;
  std::vector<BenchRow> rows;

  Report to_report() const;
  static BenchReport from_report(const Report& report);
};

/// Linear-interpolated percentile (q in [0, 100]) of the samples.
double percentile(std::vector<double> samples, double q);

/// Times N=1 forward passes on seeded random inputs and seeded weights.
/// Requires iterations >= 30 and warmup >= 5.
BenchReport run_bench(const ModelConfig& config, const BenchOptions& options);

std::string cpu_model_name();
std::string build_flags();

}  // namespace flol
