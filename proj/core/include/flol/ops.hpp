// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "flol/tensor.hpp"

// Differentiable tensor operations. Every function records a backward rule on
// the active GradTape when one of its inputs requires grad. Image-like
// operands are N x C x H x W.
namespace flol {

/// 2-D cross-correlation with zero padding. `bias` may be undefined.
/// weight: (Cout, Cin, kh, kw); output height floor((H + 2p - kh) / stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride = 1,
              int padding = 0);

/// Normalizes over the channel axis at every (n, h, w) position, then applies
/// the per-channel affine transform.
Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  float eps = 1e-6F);

/// Splits channels in two halves and multiplies them element-wise.
Tensor simple_gate(const Tensor& input);

/// Depth-to-space: (N, C*r*r, H, W) -> (N, C, r*H, r*W).
Tensor pixel_shuffle(const Tensor& input, int r);

/// Bilinear resampling with half-pixel centers (align_corners = false).
Tensor bilinear_resize(const Tensor& input, std::int64_t out_h, std::int64_t out_w);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);
Tensor add_scalar(const Tensor& a, float value);

Tensor gelu(const Tensor& x);
Tensor softplus(const Tensor& x);

/// sqrt(a^2 + b^2 + eps), element-wise.
Tensor hypot_eps(const Tensor& a, const Tensor& b, float eps);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count);

/// Clamps into [lo, hi]; the gradient is zero where clamping is active.
Tensor clip(const Tensor& x, float lo, float hi);

/// Mirror padding without edge repetition (numpy "reflect").
Tensor reflect_pad(const Tensor& x, std::int64_t top, std::int64_t bottom, std::int64_t left,
                   std::int64_t right);
Tensor crop(const Tensor& x, std::int64_t top, std::int64_t left, std::int64_t h,
            std::int64_t w);

/// Scalar mean(|a - b|).
Tensor mean_abs_diff(const Tensor& a, const Tensor& b);
/// Scalar sum of all elements, accumulated in double.
Tensor sum(const Tensor& x);

}  // namespace flol
