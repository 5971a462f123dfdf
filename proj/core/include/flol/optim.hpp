// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "flol/config.hpp"
#include "flol/weights.hpp"

namespace flol {

/// Training hyperparameters. Defaults are desk scale; the reference recipe
/// uses batch 32 and crop 256.
struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double lr_max = 4e-4;
  double lr_min = 1e-6;
  std::int64_t total_steps = 2000;
  std::int64_t batch = 8;
  std::int64_t crop = 64;
  double lambda_perceptual = 0.1;
  std::int64_t validation_every = 100;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

OptimizerConfig optimizer_config_from(const KeyValueFile& kv);
std::string to_text(const OptimizerConfig& cfg);

/// lr_min + (lr_max - lr_min)(1 + cos(pi t / T)) / 2; t > T clamps to lr_min.
double cosine_lr(std::int64_t step, const OptimizerConfig& cfg);

/// First and second moment estimates of one scalar parameter.
struct AdamMoments {
  double m = 0.0;
  double v = 0.0;
};

/// One bias-corrected Adam update at 1-based step t; returns the new value.
double adam_update(double param, double grad, AdamMoments& moments, std::int64_t t, double lr,
                   const OptimizerConfig& cfg);

/// Adam over every tensor of a store that requires grad.
class Adam {
public:
  Adam(const WeightStore& params, const OptimizerConfig& cfg);

  /// Applies one update with learning rate `lr` using the stored gradients.
  void step(WeightStore& params, double lr);
  std::int64_t steps_taken() const noexcept { return t_; }

private:
  OptimizerConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<AdamMoments>> moments_;
};

/// sqrt of the sum of squared gradients across the store, in double.
double gradient_norm(const WeightStore& params);

}  // namespace flol
