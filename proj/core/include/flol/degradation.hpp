// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flol/tensor.hpp"

namespace flol {

enum class PairSource { kSynthetic, kDirectory };

/// Aligned low-light / reference images, each (3, H, W) in [0, 1].
struct ImagePair {
  Tensor low;
  Tensor high;
  PairSource source = PairSource::kSynthetic;
  std::string id;
};

/// y = clip(alpha * x^g + n), n ~ N(0, read^2 + shot * alpha * x^g) per pixel.
struct DegradationParams {
  double alpha = 0.2;
  double gamma_exponent = 1.8;
  double read_noise = 0.01;
  double shot_noise = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

ImagePair synthesize_low_light(const Tensor& clean, const DegradationParams& p);

/// Smooth procedural RGB scene (gradients, shapes, stripes) in [0.02, 0.98].
Tensor procedural_scene(std::int64_t h, std::int64_t w, std::uint64_t seed);

struct SyntheticSetOptions {
  std::int64_t count = 64;
  std::int64_t min_size = 96;
  std::int64_t max_size = 128;
  double alpha_min = 0.1;
  double alpha_max = 0.3;
  double gamma_min = 1.4;
  double gamma_max = 2.2;
  double read_noise_max = 0.02;
  double shot_noise_max = 0.02;
  std::uint64_t seed = 0;
};

/// Procedural scenes degraded with per-pair random parameters.
std::vector<ImagePair> synthetic_pairs(const SyntheticSetOptions& options);

}  // namespace flol
