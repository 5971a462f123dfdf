// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flol/tensor.hpp"
#include "flol/weights.hpp"

// Fourier illumination enhancement: a Module Map estimated at half resolution
// divides the full-resolution Fourier amplitude while the phase is kept.
namespace flol {

/// Pointwise MLP over stacked (real, imag) spectrum channels.
struct FreMlpParams {
  Tensor conv1_weight;  // (2C, 2C, 1, 1)
  Tensor conv1_bias;
  Tensor conv2_weight;  // (2C, 2C, 1, 1)
  Tensor conv2_bias;

  static FreMlpParams bind(const WeightStore& store, const std::string& prefix);
};

struct FieBlockParams {
  Tensor norm1_gamma;
  Tensor norm1_beta;
  FreMlpParams fre_mlp;
  Tensor norm2_gamma;
  Tensor norm2_beta;
  Tensor expand_weight;   // (2eC, C, 1, 1)
  Tensor expand_bias;
  Tensor project_weight;  // (C, eC, 1, 1)
  Tensor project_bias;

  static FieBlockParams bind(const WeightStore& store, const std::string& prefix);
};

struct FieParams {
  Tensor conv_in_weight;  // (C, 3, 3, 3)
  Tensor conv_in_bias;
  std::vector<FieBlockParams> blocks;
  Tensor conv_out_weight;  // (3, C, 3, 3)
  Tensor conv_out_bias;
  float map_epsilon = 1e-4F;

  static FieParams bind(const WeightStore& store, int blocks, float map_epsilon);
};

/// Strictly positive divisor map, (N, 3, H/2, W/2).
struct ModuleMap {
  Tensor values;
  float epsilon = 1e-4F;
};

/// fft2 -> stack (re, im) -> 1x1 conv -> GELU -> 1x1 conv -> unstack -> ifft2 (real part).
Tensor fre_mlp(const Tensor& z, const FreMlpParams& p);

/// z1 = fre_mlp(LN(z)) + z;  z2 = ffn(LN(z1)) + z1 with a simple-gated FFN.
Tensor fie_block(const Tensor& z, const FieBlockParams& p);

/// 3x3 conv -> FIE blocks -> 3x3 conv -> softplus + epsilon.
ModuleMap estimate_module_map(const Tensor& x_half, const FieParams& p);

struct IlluminationOptions {
  /// Replaces the estimated map with a constant (test hook).
  std::optional<float> forced_map;
};

struct IlluminationResult {
  Tensor x_lol_raw;  // unclipped, carries the gradient path
  Tensor x_lol;      // clipped to [0, 1]
  ModuleMap map;     // half-resolution map (forced maps are full resolution)
};

IlluminationResult enhance_illumination(const Tensor& x, const FieParams& p,
                                        const IlluminationOptions& options = {});

}  // namespace flol
