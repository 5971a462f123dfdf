// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string_view>

#include "flol/tensor.hpp"

namespace flol {

/// Differentiable perception term; swap in a learned metric by subclassing.
class PerceptualLoss {
public:
  virtual ~PerceptualLoss() = default;
  virtual std::string_view name() const = 0;
  virtual Tensor operator()(const Tensor& prediction, const Tensor& target) const = 0;
};

/// mean |G(prediction) - G(target)| with G the per-channel Sobel gradient
/// magnitude sqrt(gx^2 + gy^2 + 1e-6) under reflect padding.
class SobelGradientLoss final : public PerceptualLoss {
public:
  std::string_view name() const override { return "sobel_gradient_l1"; }
  Tensor operator()(const Tensor& prediction, const Tensor& target) const override;
};

/// Per-channel Sobel gradient magnitude, (N,C,H,W) -> (N,C,H,W).
Tensor sobel_magnitude(const Tensor& x, float eps = 1e-6F);

/// Scalar tensors; total = l1_final + l1_intermediate + lambda * perceptual.
struct LossBreakdown {
  Tensor l1_final;
  Tensor l1_intermediate;
  Tensor perceptual;
  Tensor total;
};

LossBreakdown total_loss(const Tensor& x_hat, const Tensor& x_lol, const Tensor& gt, double lambda,
                         const PerceptualLoss& perceptual);
LossBreakdown total_loss(const Tensor& x_hat, const Tensor& x_lol, const Tensor& gt, double lambda);

}  // namespace flol
