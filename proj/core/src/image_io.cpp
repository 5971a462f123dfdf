// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace flol {

Tensor read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw ImageIoError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  const std::int64_t h = image.height;
  const std::int64_t w = image.width;
  Tensor out(Shape{3, h, w});
  auto d = out.data();
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < 3; ++c) {
        d[(c * h + y) * w + x] = static_cast<float>(buffer[(y * w + x) * 3 + c]) / 255.0F;
      }
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
  const auto& s = image.shape();
  std::int64_t channels = 0;
  if (s.size() == 3) {
    channels = s[0];
  } else if (s.size() == 4 && s[0] == 1) {
    channels = s[1];
  } else {
    throw DimensionError("write_png: unsupported shape " + shape_str(s));
  }
  if (channels != 1 && channels != 3) {
    throw DimensionError("write_png: need 1 or 3 channels, got shape " + shape_str(s));
  }
  const std::int64_t h = s[s.size() - 2];
  const std::int64_t w = s[s.size() - 1];
  const auto d = image.data();
  std::vector<png_byte> buffer(static_cast<std::size_t>(h * w * channels));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < channels; ++c) {
        const float v = std::clamp(d[(c * h + y) * w + x], 0.0F, 1.0F);
        buffer[(y * w + x) * channels + c] = static_cast<png_byte>(std::lround(v * 255.0F));
      }
    }
  }
  png_image out;
  std::memset(&out, 0, sizeof out);
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(w);
  out.height = static_cast<png_uint_32>(h);
  out.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&out, path.c_str(), 0, buffer.data(), 0, nullptr) == 0) {
    throw ImageIoError("cannot write PNG '" + path.string() + "': " + out.message);
  }
}

}  // namespace flol
