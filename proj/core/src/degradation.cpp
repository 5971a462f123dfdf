// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace flol {

void DegradationParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("degradation: alpha must be in (0, 1]");
  if (!(gamma_exponent >= 1.0)) throw ArgumentError("degradation: gamma exponent must be >= 1");
  if (!(read_noise >= 0.0) || !(shot_noise >= 0.0)) {
    throw ArgumentError("degradation: noise levels must be >= 0");
  }
}

ImagePair synthesize_low_light(const Tensor& clean, const DegradationParams& p) {
  p.validate();
  if (clean.rank() != 3 || clean.dim(0) != 3) {
    throw DimensionError("synthesize_low_light: expected (3,H,W), got " + shape_str(clean.shape()));
  }
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool noisy = p.read_noise > 0.0 || p.shot_noise > 0.0;
  Tensor low(clean.shape());
  const auto src = clean.data();
  auto dst = low.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!(src[i] >= 0.0F && src[i] <= 1.0F)) {
      throw ArgumentError("synthesize_low_light: clean image must lie in [0, 1]");
    }
    const double signal = p.alpha * std::pow(static_cast<double>(src[i]), p.gamma_exponent);
    double y = signal;
    if (noisy) {
      y += normal(rng) * std::sqrt(p.read_noise * p.read_noise + p.shot_noise * signal);
    }
    dst[i] = static_cast<float>(std::clamp(y, 0.0, 1.0));
  }
  return ImagePair{low, clean, PairSource::kSynthetic, {}};
}

Tensor procedural_scene(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  if (h < 1 || w < 1) throw ArgumentError("procedural_scene: empty size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor img(Shape{3, h, w});
  auto d = img.data();
  const auto hw = h * w;

  // Background: per-channel linear gradient.
  for (int c = 0; c < 3; ++c) {
    const double base = 0.2 + 0.6 * u(rng);
    const double gy = (u(rng) - 0.5) * 0.6;
    const double gx = (u(rng) - 0.5) * 0.6;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        d[c * hw + y * w + x] = static_cast<float>(base + gy * (static_cast<double>(y) / h - 0.5) +
                                                   gx * (static_cast<double>(x) / w - 0.5));
      }
    }
  }
  // Flat-coloured rectangles and discs.
  const int shapes = 4 + static_cast<int>(u(rng) * 5);
  for (int s = 0; s < shapes; ++s) {
    double colour[3];
    for (auto& v : colour) v = 0.05 + 0.9 * u(rng);
    const double cy = u(rng) * h;
    const double cx = u(rng) * w;
    const double ry = (0.08 + 0.25 * u(rng)) * h;
    const double rx = (0.08 + 0.25 * u(rng)) * w;
    const bool disc = u(rng) < 0.5;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) d[c * hw + y * w + x] = static_cast<float>(colour[c]);
      }
    }
  }
  // Low-amplitude oriented stripes for texture.
  const double freq = 0.05 + 0.25 * u(rng);
  const double angle = u(rng) * std::numbers::pi;
  const double amp = 0.04 + 0.08 * u(rng);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const double t = std::sin(freq * (x * std::cos(angle) + y * std::sin(angle)));
      for (int c = 0; c < 3; ++c) {
        auto& v = d[c * hw + y * w + x];
        v = static_cast<float>(std::clamp(v + amp * t, 0.02, 0.98));
      }
    }
  }
  return img;
}

std::vector<ImagePair> synthetic_pairs(const SyntheticSetOptions& o) {
  if (o.count < 1 || o.min_size < 1 || o.max_size < o.min_size) {
    throw ArgumentError("synthetic_pairs: invalid options");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> size(o.min_size, o.max_size);
  std::vector<ImagePair> pairs;
  pairs.reserve(static_cast<std::size_t>(o.count));
  for (std::int64_t i = 0; i < o.count; ++i) {
    const auto h = size(rng);
    const auto w = size(rng);
    const Tensor clean = procedural_scene(h, w, rng());
    DegradationParams p;
    p.alpha = o.alpha_min + (o.alpha_max - o.alpha_min) * u(rng);
    p.gamma_exponent = o.gamma_min + (o.gamma_max - o.gamma_min) * u(rng);
    p.read_noise = o.read_noise_max * u(rng);
    p.shot_noise = o.shot_noise_max * u(rng);
    p.seed = rng();
    ImagePair pair = synthesize_low_light(clean, p);
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04lld", static_cast<long long>(i));
    pair.id = id;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace flol
