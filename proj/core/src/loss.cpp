// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/loss.hpp"

#include "flol/ops.hpp"

namespace flol {

Tensor sobel_magnitude(const Tensor& x, float eps) {
  if (x.rank() != 4) throw DimensionError("sobel_magnitude: expected (N,C,H,W)");
  const auto c = x.dim(1);
  static constexpr float kGx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static constexpr float kGy[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  // Block-diagonal kernel: outputs [gx_0..gx_{C-1}, gy_0..gy_{C-1}].
  Tensor weight(Shape{2 * c, c, 3, 3});
  auto w = weight.data();
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (int k = 0; k < 9; ++k) {
      w[(ch * c + ch) * 9 + k] = kGx[k];
      w[((c + ch) * c + ch) * 9 + k] = kGy[k];
    }
  }
  const Tensor g = conv2d(reflect_pad(x, 1, 1, 1, 1), weight, Tensor());
  return hypot_eps(slice_channels(g, 0, c), slice_channels(g, c, c), eps);
}

Tensor SobelGradientLoss::operator()(const Tensor& prediction, const Tensor& target) const {
  return mean_abs_diff(sobel_magnitude(prediction), sobel_magnitude(target));
}

LossBreakdown total_loss(const Tensor& x_hat, const Tensor& x_lol, const Tensor& gt, double lambda,
                         const PerceptualLoss& perceptual) {
  if (x_hat.shape() != gt.shape() || x_lol.shape() != gt.shape()) {
    throw DimensionError("total_loss: shapes " + shape_str(x_hat.shape()) + ", " +
                         shape_str(x_lol.shape()) + ", " + shape_str(gt.shape()) + " differ");
  }
  if (!(lambda >= 0.0)) throw ArgumentError("total_loss: lambda must be >= 0");
  LossBreakdown b;
  b.l1_final = mean_abs_diff(x_hat, gt);
  b.l1_intermediate = mean_abs_diff(x_lol, gt);
  b.perceptual = perceptual(x_hat, gt);
  b.total = add(add(b.l1_final, b.l1_intermediate), scale(b.perceptual, static_cast<float>(lambda)));
  return b;
}

LossBreakdown total_loss(const Tensor& x_hat, const Tensor& x_lol, const Tensor& gt,
                         double lambda) {
  return total_loss(x_hat, x_lol, gt, lambda, SobelGradientLoss{});
}

}  // namespace flol
