// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flol/config.hpp"
#include "flol/denoiser.hpp"
#include "flol/fie.hpp"
#include "flol/tensor.hpp"
#include "flol/weights.hpp"

namespace flol {

struct ParamSpec {
  std::string name;
  Shape shape;
};

/// Every parameter tensor of the configured architecture, in storage order.
std::vector<ParamSpec> parameter_layout(const ModelConfig& config);

/// Closed-form scalar parameter count; agrees with parameter_layout.
std::int64_t count_params(const ModelConfig& config);

/// Analytic FLOPs of one forward pass on a 1x3xHxW input; agrees exactly with
/// the instrumented count recorded by a FlopScope around forward().
std::uint64_t count_flops(const ModelConfig& config, std::int64_t h, std::int64_t w);

/// Kaiming-uniform conv weights (bound sqrt(6 / fan_in)), zero biases, unit
/// norm scales. The two output heads start at the identity: the map head
/// emits exactly 1 and the denoiser head emits 0. Bit-reproducible for a
/// given seed on any platform.
WeightStore init_weights(const ModelConfig& config, std::uint64_t seed);

/// All parameters zero, norm scales included.
WeightStore zero_weights(const ModelConfig& config);

/// Throws WeightError naming the first tensor that is missing, unexpected or
/// mis-shaped for `config`.
void validate_weights(const WeightStore& store, const ModelConfig& config);

/// Reads a weight file and validates it against `config` before returning.
WeightStore load_weights(const std::filesystem::path& path, const ModelConfig& config);

struct ForwardOptions {
  /// Constant Module Map in place of the estimated one (test hook).
  std::optional<float> forced_map;
};

struct EnhanceResult {
  Tensor x_lol;      // clipped intermediate
  Tensor x_hat;      // clipped output
  Tensor x_lol_raw;  // unclipped, for the loss
  Tensor x_hat_raw;
  ModuleMap map;
  SnrMap snr;
};

/// Both stages bound to one validated weight store. Immutable after
/// construction; forward() may run concurrently on distinct inputs.
class Model {
public:
  Model(const WeightStore& weights, const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  EnhanceResult forward(const Tensor& x, const ForwardOptions& options = {}) const;

private:
  ModelConfig config_;
  FieParams fie_;
  DenoiserParams denoiser_;
};

EnhanceResult forward(const Tensor& x, const WeightStore& weights, const ModelConfig& config,
                      const ForwardOptions& options = {});

}  // namespace flol
