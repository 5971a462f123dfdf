// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/model.hpp"

#include <cmath>
#include <random>
#include <unordered_set>

namespace flol {

namespace {

void push_conv(std::vector<ParamSpec>& out, const std::string& prefix, std::int64_t cout,
               std::int64_t cin, std::int64_t k) {
  out.push_back({prefix + ".weight", {cout, cin, k, k}});
  out.push_back({prefix + ".bias", {cout}});
}

void push_fre_mlp(std::vector<ParamSpec>& out, const std::string& prefix, std::int64_t c) {
  push_conv(out, prefix + ".conv1", 2 * c, 2 * c, 1);
  push_conv(out, prefix + ".conv2", 2 * c, 2 * c, 1);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// softplus(b) + epsilon == 1
float unit_map_logit(float epsilon) {
  return static_cast<float>(std::log(std::expm1(1.0 - static_cast<double>(epsilon))));
}

std::uint64_t u64(std::int64_t v) { return static_cast<std::uint64_t>(v); }

std::uint64_t fft_flops(std::int64_t planes, std::int64_t hw) {
  const double d = static_cast<double>(hw);
  return u64(planes) * u64(hw > 1 ? std::llround(5.0 * d * std::log2(d)) : 0);
}

std::uint64_t conv_flops(std::int64_t cout, std::int64_t cin, std::int64_t k, std::int64_t pixels) {
  return 2 * u64(cout * cin * k * k * pixels) + u64(cout * pixels);
}

std::uint64_t fre_mlp_flops(std::int64_t c, std::int64_t pixels) {
  return 2 * fft_flops(c, pixels) + 2 * conv_flops(2 * c, 2 * c, 1, pixels) + u64(2 * c * pixels);
}

}  // namespace

std::vector<ParamSpec> parameter_layout(const ModelConfig& config) {
  config.validate();
  const std::int64_t c = config.nc;
  const std::int64_t e = config.ffn_expansion;
  std::vector<ParamSpec> out;
  push_conv(out, "fie.conv_in", c, 3, 3);
  for (int i = 0; i < config.fie_blocks; ++i) {
    const std::string b = "fie.block" + std::to_string(i);
    out.push_back({b + ".norm1.gamma", {c}});
    out.push_back({b + ".norm1.beta", {c}});
    push_fre_mlp(out, b + ".fre_mlp", c);
    out.push_back({b + ".norm2.gamma", {c}});
    out.push_back({b + ".norm2.beta", {c}});
    push_conv(out, b + ".ffn.expand", 2 * e * c, c, 1);
    push_conv(out, b + ".ffn.project", c, e * c, 1);
  }
  push_conv(out, "fie.conv_out", 3, c, 3);

  push_conv(out, "den.conv_in", c, 6, 3);
  push_conv(out, "den.down1", c, c, 3);
  push_conv(out, "den.down2", c, c, 3);
  for (int i = 0; i < 2; ++i) {
    const std::string s = "den.spatial" + std::to_string(i);
    push_conv(out, s + ".conv1", c, c, 3);
    push_conv(out, s + ".conv2", c, c, 3);
  }
  for (int i = 0; i < 2; ++i) push_fre_mlp(out, "den.freq" + std::to_string(i), c);
  push_conv(out, "den.up1", 4 * c, c, 3);
  push_conv(out, "den.up2", 4 * c, c, 3);
  if (config.skip_mode == SkipMode::kConcat) {
    push_conv(out, "den.merge1", c, 2 * c, 3);
    push_conv(out, "den.merge2", c, 2 * c, 3);
  }
  push_conv(out, "den.head", 3, c, 3);
  return out;
}

std::int64_t count_params(const ModelConfig& config) {
  config.validate();
  const std::int64_t c = config.nc;
  const std::int64_t e = config.ffn_expansion;
  const auto conv = [](std::int64_t cout, std::int64_t cin, std::int64_t k) {
    return cout * cin * k * k + cout;
  };
  const std::int64_t fre_mlp = 2 * conv(2 * c, 2 * c, 1);
  const std::int64_t block = 4 * c + fre_mlp + conv(2 * e * c, c, 1) + conv(c, e * c, 1);
  const std::int64_t fie = conv(c, 3, 3) + config.fie_blocks * block + conv(3, c, 3);
  std::int64_t den = conv(c, 6, 3) + 2 * conv(c, c, 3) + 4 * conv(c, c, 3) + 2 * fre_mlp +
                     2 * conv(4 * c, c, 3) + conv(3, c, 3);
  if (config.skip_mode == SkipMode::kConcat) den += 2 * conv(c, 2 * c, 3);
  return fie + den;
}

std::uint64_t count_flops(const ModelConfig& config, std::int64_t h, std::int64_t w) {
  config.validate();
  if (h < 2 || w < 2) throw ArgumentError("count_flops: H and W must be >= 2");
  const std::int64_t c = config.nc;
  const std::int64_t e = config.ffn_expansion;
  const std::int64_t full = h * w;
  const std::int64_t half = (h / 2) * (w / 2);

  // Illumination stage.
  std::uint64_t fie = 2 * fft_flops(3, full) + u64(4 * 3 * full);  // fft, ifft, decompose,
                                                                     // upsample, div, recompose
  fie += u64(3 * full);                                              // clip
  fie += u64(3 * half) + conv_flops(c, 3, 3, half);
  const std::uint64_t block = u64(4 * c * half) + fre_mlp_flops(c, half) +
                              conv_flops(2 * e * c, c, 1, half) + u64(e * c * half) +
                              conv_flops(c, e * c, 1, half);
  fie += u64(config.fie_blocks) * block;
  fie += conv_flops(3, c, 3, half) + u64(2 * 3 * half);  // softplus, +epsilon

  // Denoiser on the padded grid.
  const std::int64_t hp = (h + 3) / 4 * 4;
  const std::int64_t wp = (w + 3) / 4 * 4;
  const std::int64_t p0 = hp * wp;
  const std::int64_t p1 = p0 / 4;
  const std::int64_t p2 = p0 / 16;
  const std::int64_t k = config.snr_blur;
  std::uint64_t den = u64(3 * full) + u64(p0 * (3 + k * k + 4));
  den += conv_flops(c, 6, 3, p0) + u64(c * p0);
  den += conv_flops(c, c, 3, p1) + u64(c * p1);
  den += conv_flops(c, c, 3, p2) + u64(c * p2);
  den += 2 * (2 * conv_flops(c, c, 3, p2) + u64(2 * c * p2));
  den += 2 * (fre_mlp_flops(c, p2) + u64(c * p2));
  den += u64(p2) + u64(c * p2);  // resize R, fuse
  den += conv_flops(4 * c, c, 3, p2) + conv_flops(4 * c, c, 3, p1);
  if (config.skip_mode == SkipMode::kConcat) {
    den += conv_flops(c, 2 * c, 3, p1) + conv_flops(c, 2 * c, 3, p0);
  } else {
    den += u64(c * p1) + u64(c * p0);
  }
  den += conv_flops(3, c, 3, p0) + u64(2 * 3 * full);  // head, residual, clip
  return fie + den;
}

WeightStore init_weights(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // 24 high bits -> uniform [0, 1); avoids the implementation-defined distributions.
  const auto uniform = [&rng]() { return static_cast<double>(rng() >> 40) * 0x1.0p-24; };
  WeightStore store;
  for (const auto& spec : parameter_layout(config)) {
    Tensor t(spec.shape);
    auto d = t.data();
    if (ends_with(spec.name, ".gamma")) {
      std::fill(d.begin(), d.end(), 1.0F);
    } else if (spec.name == "fie.conv_out.bias") {
      std::fill(d.begin(), d.end(), unit_map_logit(config.map_epsilon));
    } else if (spec.name == "fie.conv_out.weight" || spec.name == "den.head.weight") {
      // Output heads start at the identity: map == 1, zero residual.
    } else if (ends_with(spec.name, ".weight")) {
      const double fan_in = static_cast<double>(spec.shape[1] * spec.shape[2] * spec.shape[3]);
      const double bound = std::sqrt(6.0 / fan_in);
      for (auto& v : d) v = static_cast<float>((2.0 * uniform() - 1.0) * bound);
    }
    store.add(spec.name, std::move(t));
  }
  return store;
}

WeightStore zero_weights(const ModelConfig& config) {
  WeightStore store;
  for (const auto& spec : parameter_layout(config)) store.add(spec.name, Tensor(spec.shape));
  return store;
}

void validate_weights(const WeightStore& store, const ModelConfig& config) {
  const auto layout = parameter_layout(config);
  std::unordered_set<std::string> expected;
  for (const auto& spec : layout) {
    expected.insert(spec.name);
    if (!store.contains(spec.name)) {
      throw WeightError(WeightErrorKind::kMissingTensor, spec.name,
                        "weights lack tensor '" + spec.name + "' required by the configuration");
    }
    const auto& got = store.get(spec.name).shape();
    if (got != spec.shape) {
      throw WeightError(WeightErrorKind::kShapeMismatch, spec.name,
                        "tensor '" + spec.name + "' has shape " + shape_str(got) +
                            " but the configuration needs " + shape_str(spec.shape));
    }
  }
  for (const auto& entry : store.entries()) {
    if (!expected.contains(entry.name)) {
      throw WeightError(WeightErrorKind::kUnexpectedTensor, entry.name,
                        "tensor '" + entry.name + "' is not part of the configured model");
    }
  }
}

WeightStore load_weights(const std::filesystem::path& path, const ModelConfig& config) {
  WeightStore store = load_weights(path);
  validate_weights(store, config);
  return store;
}

Model::Model(const WeightStore& weights, const ModelConfig& config) : config_(config) {
  validate_weights(weights, config);
  fie_ = FieParams::bind(weights, config.fie_blocks, config.map_epsilon);
  denoiser_ = DenoiserParams::bind(weights, config);
}

EnhanceResult Model::forward(const Tensor& x, const ForwardOptions& options) const {
  if (x.rank() != 4 || x.dim(1) != 3) {
    throw DimensionError("forward: expected (N,3,H,W), got " + shape_str(x.shape()));
  }
  for (float v : x.data()) {
    if (!(v >= 0.0F && v <= 1.0F)) throw ArgumentError("forward: input values must lie in [0, 1]");
  }
  IlluminationOptions ill;
  ill.forced_map = options.forced_map;
  IlluminationResult stage1 = enhance_illumination(x, fie_, ill);
  DenoiserResult stage2 = run_denoiser(x, stage1.x_lol_raw, denoiser_);
  EnhanceResult r;
  r.x_lol = std::move(stage1.x_lol);
  r.x_lol_raw = std::move(stage1.x_lol_raw);
  r.map = std::move(stage1.map);
  r.x_hat = std::move(stage2.x_hat);
  r.x_hat_raw = std::move(stage2.x_hat_raw);
  r.snr = std::move(stage2.snr);
  return r;
}

EnhanceResult forward(const Tensor& x, const WeightStore& weights, const ModelConfig& config,
                      const ForwardOptions& options) {
  return Model(weights, config).forward(x, options);
}

}  // namespace flol
