// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flol/ops.hpp"

namespace flol {

namespace {

std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::int64_t round_up4(std::int64_t v) { return (v + 3) / 4 * 4; }

ConvParams bind_conv(const WeightStore& store, const std::string& prefix) {
  return {store.get(prefix + ".weight"), store.get(prefix + ".bias")};
}

Tensor conv3(const Tensor& x, const ConvParams& p, int stride = 1) {
  return conv2d(x, p.weight, p.bias, stride, 1);
}

}  // namespace

SnrMap compute_snr_map(const Tensor& x_lol, int blur_kernel_size, float epsilon) {
  if (x_lol.rank() != 4) throw DimensionError("compute_snr_map: expected (N,C,H,W)");
  if (blur_kernel_size < 1 || blur_kernel_size % 2 == 0) {
    throw ArgumentError("compute_snr_map: blur kernel size must be odd and positive");
  }
  const auto n = x_lol.dim(0);
  const auto c = x_lol.dim(1);
  const auto h = x_lol.dim(2);
  const auto w = x_lol.dim(3);
  const auto hw = h * w;
  const int half = blur_kernel_size / 2;
  const double inv_k2 = 1.0 / (blur_kernel_size * blur_kernel_size);
  const auto src = x_lol.data();

  Tensor out(Shape{n, 1, h, w});
  auto dst = out.data();
  std::vector<double> g(static_cast<std::size_t>(hw));
  std::vector<double> rows(static_cast<std::size_t>(hw));
  std::vector<double> ratio(static_cast<std::size_t>(hw));
  for (std::int64_t b = 0; b < n; ++b) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const float* plane = src.data() + (b * c + ch) * hw;
      for (std::int64_t i = 0; i < hw; ++i) g[i] += plane[i];
    }
    for (auto& v : g) v /= static_cast<double>(c);

    // Separable box sum under reflect padding: rows, then columns.
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int d = -half; d <= half; ++d) acc += g[y * w + reflect_index(x + d, w)];
        rows[y * w + x] = acc;
      }
    }
    double peak = 0.0;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int d = -half; d <= half; ++d) acc += rows[reflect_index(y + d, h) * w + x];
        const double blurred = acc * inv_k2;
        const double noise = std::abs(g[y * w + x] - blurred);
        const double r = blurred / (noise + static_cast<double>(epsilon));
        ratio[y * w + x] = r;
        peak = std::max(peak, r);
      }
    }
    float* o = dst.data() + b * hw;
    for (std::int64_t i = 0; i < hw; ++i) {
      o[i] = peak > 0.0 ? static_cast<float>(std::clamp(ratio[i] / peak, 0.0, 1.0)) : 1.0F;
    }
  }
  add_flops(static_cast<std::uint64_t>(n * hw * (c + blur_kernel_size * blur_kernel_size + 4)));
  return SnrMap{out, blur_kernel_size, epsilon};
}

Tensor snr_fuse(const BranchOutputs& branches, const Tensor& r) {
  const Tensor& s = branches.spatial;
  const Tensor& f = branches.frequency;
  if (s.shape() != f.shape() || s.rank() != 4) {
    throw DimensionError("snr_fuse: branch shapes differ: " + shape_str(s.shape()) + " vs " +
                         shape_str(f.shape()));
  }
  if (r.rank() != 4 || r.dim(0) != s.dim(0) || r.dim(1) != 1 || r.dim(2) != s.dim(2) ||
      r.dim(3) != s.dim(3)) {
    throw DimensionError("snr_fuse: map shape " + shape_str(r.shape()) + " incompatible with " +
                         shape_str(s.shape()));
  }
  const auto n = s.dim(0);
  const auto c = s.dim(1);
  const auto hw = s.dim(2) * s.dim(3);
  Tensor out(s.shape());
  {
    const auto sd = s.data();
    const auto fd = f.data();
    const auto rd = r.data();
    auto od = out.data();
    for (std::int64_t b = 0; b < n; ++b) {
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const auto base = (b * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
          const double ri = rd[b * hw + i];
          od[base + i] =
              static_cast<float>(static_cast<double>(sd[base + i]) * ri +
                                 static_cast<double>(fd[base + i]) * (1.0 - ri));
        }
      }
    }
  }
  add_flops(static_cast<std::uint64_t>(out.numel()));
  if (should_record({&s, &f, &r})) {
    GradTape::active()->record(
        "snr_fuse", {s, f, r}, {out}, [s, f, r, out, n, c, hw]() mutable {
          const auto go = out.grad();
          const auto rd = r.data();
          const bool gs = s.requires_grad();
          const bool gf = f.requires_grad();
          const bool gr = r.requires_grad();
          auto dsd = gs ? s.ensure_grad() : std::span<float>();
          auto dfd = gf ? f.ensure_grad() : std::span<float>();
          auto drd = gr ? r.ensure_grad() : std::span<float>();
          const auto sd = s.data();
          const auto fd = f.data();
          for (std::int64_t b = 0; b < n; ++b) {
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const auto base = (b * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                const float g = go[base + i];
                const float ri = rd[b * hw + i];
                if (gs) dsd[base + i] += g * ri;
                if (gf) dfd[base + i] += g * (1.0F - ri);
                if (gr) drd[b * hw + i] += g * (sd[base + i] - fd[base + i]);
              }
            }
          }
        });
  }
  check_finite(out, "snr_fuse");
  return out;
}

DenoiserParams DenoiserParams::bind(const WeightStore& store, const ModelConfig& config) {
  DenoiserParams p;
  p.skip_mode = config.skip_mode;
  p.snr_blur = config.snr_blur;
  p.snr_epsilon = config.snr_epsilon;
  p.conv_in = bind_conv(store, "den.conv_in");
  p.down1 = bind_conv(store, "den.down1");
  p.down2 = bind_conv(store, "den.down2");
  for (int i = 0; i < 2; ++i) {
    const auto idx = std::to_string(i);
    p.spatial.push_back({bind_conv(store, "den.spatial" + idx + ".conv1"),
                         bind_conv(store, "den.spatial" + idx + ".conv2")});
    p.frequency.push_back(FreMlpParams::bind(store, "den.freq" + idx));
  }
  p.up1 = bind_conv(store, "den.up1");
  p.up2 = bind_conv(store, "den.up2");
  if (config.skip_mode == SkipMode::kConcat) {
    p.merge1 = bind_conv(store, "den.merge1");
    p.merge2 = bind_conv(store, "den.merge2");
  }
  p.head = bind_conv(store, "den.head");
  return p;
}

DenoiserResult run_denoiser(const Tensor& x, const Tensor& x_lol_raw, const DenoiserParams& p) {
  if (x.rank() != 4 || x.dim(1) != 3) throw DimensionError("run_denoiser: expected (N,3,H,W)");
  if (x.shape() != x_lol_raw.shape()) {
    throw DimensionError("run_denoiser: x " + shape_str(x.shape()) + " vs x_lol " +
                         shape_str(x_lol_raw.shape()));
  }
  const auto h = x.dim(2);
  const auto w = x.dim(3);
  const auto hp = round_up4(h);
  const auto wp = round_up4(w);

  Tensor input = concat_channels(x_lol_raw, x);
  if (hp != h || wp != w) input = reflect_pad(input, 0, hp - h, 0, wp - w);

  // Guidance comes from the clipped intermediate image and is a constant for the optimizer.
  Tensor guide = clip(x_lol_raw, 0.0F, 1.0F).detach();
  if (hp != h || wp != w) guide = reflect_pad(guide, 0, hp - h, 0, wp - w);
  const SnrMap snr = compute_snr_map(guide, p.snr_blur, p.snr_epsilon);

  DenoiserResult result;
  Tensor e_full = gelu(conv3(input, p.conv_in));
  input = Tensor();
  Tensor e_half = gelu(conv3(e_full, p.down1, 2));
  Tensor bottleneck = gelu(conv3(e_half, p.down2, 2));

  Tensor s = bottleneck;
  for (const auto& block : p.spatial) {
    s = add(s, conv3(gelu(conv3(s, block.conv1)), block.conv2));
  }
  Tensor f = bottleneck;
  for (const auto& block : p.frequency) f = add(f, fre_mlp(f, block));
  bottleneck = Tensor();

  const Tensor r = bilinear_resize(snr.values, hp / 4, wp / 4);
  Tensor d = snr_fuse(BranchOutputs{s, f}, r);
  s = Tensor();
  f = Tensor();

  const auto merge = [&](const Tensor& up, const Tensor& skip, const ConvParams& m) {
    return p.skip_mode == SkipMode::kConcat ? conv3(concat_channels(up, skip), m)
                                            : add(up, skip);
  };
  d = merge(pixel_shuffle(conv3(d, p.up1), 2), e_half, p.merge1);
  e_half = Tensor();
  d = merge(pixel_shuffle(conv3(d, p.up2), 2), e_full, p.merge2);
  e_full = Tensor();

  Tensor head = conv3(d, p.head);
  d = Tensor();
  if (hp != h || wp != w) head = crop(head, 0, 0, h, w);

  result.x_hat_raw = add(head, x);
  result.x_hat = clip(result.x_hat_raw, 0.0F, 1.0F);
  result.snr = snr;
  if (hp != h || wp != w) {
    result.snr.values = crop(snr.values, 0, 0, h, w);
  }
  return result;
}

}  // namespace flol
