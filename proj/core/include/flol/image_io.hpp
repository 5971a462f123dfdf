// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>

#include "flol/tensor.hpp"

namespace flol {

class ImageIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Any PNG flavour, converted to 8-bit RGB, as a (3, H, W) tensor in [0, 1].
Tensor read_png(const std::filesystem::path& path);

/// Writes (3,H,W), (1,3,H,W), (1,H,W) or (1,1,H,W) as 8-bit RGB or grayscale.
/// Values are clamped to [0, 1] and rounded to the nearest code.
void write_png(const std::filesystem::path& path, const Tensor& image);

}  // namespace flol
