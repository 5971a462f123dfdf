// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "flol/model.hpp"

#ifndef FLOL_BUILD_FLAGS
#define FLOL_BUILD_FLAGS "unknown"
#endif

namespace flol {

std::vector<Resolution> default_bench_resolutions() {
  return {{640, 480}, {1280, 720}, {1920, 1080}, {2560, 1440}};
}

std::vector<Resolution> parse_resolutions(std::string_view text) {
  std::vector<Resolution> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    const auto x = item.find('x');
    Resolution r;
    const auto parse = [&](std::string_view s, std::int64_t& v) {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      return res.ec == std::errc() && res.ptr == s.data() + s.size() && v >= 16;
    };
    if (x == std::string_view::npos || !parse(item.substr(0, x), r.width) ||
        !parse(item.substr(x + 1), r.height)) {
      throw ConfigError("bad resolution '" + std::string(item) + "' (want WxH, both >= 16)");
    }
    out.push_back(r);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double percentile(std::vector<double> s, double q) {
  if (s.empty()) throw ArgumentError("percentile: no samples");
  std::sort(s.begin(), s.end());
  const double pos = q / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (s[hi] - s[lo]) * (pos - static_cast<double>(lo));
}

std::string cpu_model_name() {
  std::ifstream f("/proc/cpuinfo");
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto name = line.substr(colon + 1);
        name.erase(0, name.find_first_not_of(' '));
        return name;
      }
    }
  }
  return "unknown";
}

std::string build_flags() { return FLOL_BUILD_FLAGS; }

BenchReport run_bench(const ModelConfig& config, const BenchOptions& options) {
  if (options.iterations < 30) throw ConfigError("bench needs at least 30 timed iterations");
  if (options.warmup < 5) throw ConfigError("bench needs at least 5 warm-up runs");
  if (options.resolutions.empty()) throw ConfigError("bench needs at least one resolution");
  const WeightStore weights = init_weights(config, options.seed);
  const Model model(weights, config);

  BenchReport report;
  report.environment.cpu_model = cpu_model_name();
  report.environment.build_flags = build_flags();
  report.environment.warmup = options.warmup;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  for (const auto& res : options.resolutions) {
    Tensor x(Shape{1, 3, res.height, res.width});
    for (auto& v : x.data()) v = u(rng);
    BenchRow row;
    row.resolution = res;
    row.flops = count_flops(config, res.height, res.width);
    row.flops_g = static_cast<double>(row.flops) / 1e9;
    for (int i = 0; i < options.warmup; ++i) (void)model.forward(x);
    for (int i = 0; i < options.iterations; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)model.forward(x);
      const auto t1 = std::chrono::steady_clock::now();
      row.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    row.iterations = options.iterations;
    row.mean_ms = std::accumulate(row.samples_ms.begin(), row.samples_ms.end(), 0.0) /
                  static_cast<double>(row.samples_ms.size());
    row.p50_ms = percentile(row.samples_ms, 50.0);
    row.p95_ms = percentile(row.samples_ms, 95.0);
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report BenchReport::to_report() const {
  Report r;
  r.meta = {{"kind", "bench"},
            {"cpu_model", environment.cpu_model},
            {"threads", std::to_string(environment.threads)},
            {"mode", environment.mode},
            {"build_flags", environment.build_flags},
            {"warmup", std::to_string(environment.warmup)},
            {"batch", "1"}};
  r.columns = {"width", "height", "flops", "flops_g", "mean_ms", "p50_ms", "p95_ms", "iterations"};
  for (const auto& row : rows) {
    r.rows.push_back({std::to_string(row.resolution.width), std::to_string(row.resolution.height),
                      std::to_string(row.flops), format_double(row.flops_g),
                      format_double(row.mean_ms), format_double(row.p50_ms),
                      format_double(row.p95_ms), std::to_string(row.iterations)});
  }
  return r;
}

BenchReport BenchReport::from_report(const Report& r) {
  BenchReport b;
  const auto get = [&](const char* key) {
    const auto* v = r.meta_value(key);
    return v ? *v : std::string();
  };
  b.environment.cpu_model = get("cpu_model");
  b.environment.mode = get("mode");
  b.environment.build_flags = get("build_flags");
  b.environment.threads = std::stoi(get("threads").empty() ? "0" : get("threads"));
  b.environment.warmup = std::stoi(get("warmup").empty() ? "0" : get("warmup"));
  const auto cw = r.column("width");
  const auto ch = r.column("height");
  const auto cf = r.column("flops");
  const auto cg = r.column("flops_g");
  const auto cm = r.column("mean_ms");
  const auto c50 = r.column("p50_ms");
  const auto c95 = r.column("p95_ms");
  const auto ci = r.column("iterations");
  for (const auto& row : r.rows) {
    BenchRow br;
    br.resolution = {std::stoll(row[cw]), std::stoll(row[ch])};
    br.flops = std::stoull(row[cf]);
    br.flops_g = parse_double(row[cg]);
    br.mean_ms = parse_double(row[cm]);
    br.p50_ms = parse_double(row[c50]);
    br.p95_ms = parse_double(row[c95]);
    br.iterations = std::stoi(row[ci]);
    b.rows.push_back(std::move(br));
  }
  return b;
}

}  // namespace flol
