// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "flol/tensor.hpp"

namespace flol {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) over all elements (RGB), capped when MSE < 1e-10.
double psnr(const Tensor& a, const Tensor& b);

/// Mean SSIM over valid 11x11 Gaussian (sigma 1.5) windows of the channel-mean
/// grayscale images; K1 = 0.01, K2 = 0.03, L = 1. Accepts (C,H,W) or (1,C,H,W).
double ssim(const Tensor& a, const Tensor& b);

}  // namespace flol
