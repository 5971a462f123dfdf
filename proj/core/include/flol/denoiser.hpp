// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "flol/config.hpp"
#include "flol/fie.hpp"
#include "flol/tensor.hpp"
#include "flol/weights.hpp"

// SNR-guided denoiser: a three-level encoder/decoder whose bottleneck blends a
// spatial and a frequency branch by a per-pixel reliability map.
namespace flol {

/// Per-pixel reliability in [0, 1], (N, 1, H, W). Never carries gradient.
struct SnrMap {
  Tensor values;
  int blur_kernel_size = 5;
  float epsilon = 1e-4F;
};

struct BranchOutputs {
  Tensor spatial;
  Tensor frequency;
};

/// R = normalize(blur(g) / (|g - blur(g)| + epsilon)) with g the channel mean.
/// An image whose ratio is zero everywhere maps to R = 1.
SnrMap compute_snr_map(const Tensor& x_lol, int blur_kernel_size = 5, float epsilon = 1e-4F);

/// F = O_S * R + O_F * (1 - R), R broadcast over channels. Evaluated in double
/// so that R in {0, 1} reproduces a branch exactly.
Tensor snr_fuse(const BranchOutputs& branches, const Tensor& r);

struct ConvParams {
  Tensor weight;
  Tensor bias;
};

struct ResidualConvParams {
  ConvParams conv1;
  ConvParams conv2;
};

struct DenoiserParams {
  SkipMode skip_mode = SkipMode::kConcat;
  int snr_blur = 5;
  float snr_epsilon = 1e-4F;
  ConvParams conv_in;  // 3x3, 6 -> NC
  ConvParams down1;    // 3x3 stride 2
  ConvParams down2;    // 3x3 stride 2
  std::vector<ResidualConvParams> spatial;
  std::vector<FreMlpParams> frequency;
  ConvParams up1;  // 3x3, NC -> 4NC, then pixel shuffle
  ConvParams up2;
  ConvParams merge1;  // concat mode only: 3x3, 2NC -> NC
  ConvParams merge2;
  ConvParams head;  // 3x3, NC -> 3

  static DenoiserParams bind(const WeightStore& store, const ModelConfig& config);
};

struct DenoiserResult {
  Tensor x_hat_raw;  // head output + x, unclipped
  Tensor x_hat;      // clipped to [0, 1]
  SnrMap snr;        // at input resolution
};

/// H and W need not be multiples of 4: the input is reflect-padded on the
/// bottom/right and the output cropped back.
DenoiserResult run_denoiser(const Tensor& x, const Tensor& x_lol_raw, const DenoiserParams& p);

}  // namespace flol
