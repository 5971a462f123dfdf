// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Inputs are drawn away from kinks (clip bounds, |0|, the atan2 branch cut)
// so a probe never straddles a point of non-differentiability.

#include "grad_suite.hpp"

#include <random>

#include "flol/denoiser.hpp"
#include "flol/fie.hpp"
#include "flol/loss.hpp"
#include "flol/model.hpp"
#include "flol/ops.hpp"
#include "flol/spectral.hpp"
#include "test_util.hpp"

namespace flol::test {
namespace {

// Uniform magnitude in [lo, hi] with a random sign.
Tensor signed_away_from_zero(const Shape& shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  Tensor t(shape);
  for (auto& v : t.data()) v = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

using Op = std::function<Tensor(const std::vector<Tensor>&)>;
using Maker = std::function<std::vector<Tensor>(std::uint64_t)>;

Maker uniform_inputs(std::vector<Shape> shapes) {
  return [shapes](std::uint64_t seed) {
    std::vector<Tensor> v;
    for (std::size_t i = 0; i < shapes.size(); ++i) v.push_back(uniform(shapes[i], seed * 17 + i));
    return v;
  };
}

GradCase op_case(std::string name, Op op, Maker make) {
  return {std::move(name), [op = std::move(op), make = std::move(make)](std::uint64_t seed) {
            const auto inputs = make(seed);
            std::vector<NamedTensor> named;
            for (std::size_t i = 0; i < inputs.size(); ++i) {
              named.push_back({"input" + std::to_string(i), inputs[i]});
            }
            return grad_check([&] { return op(inputs); }, named);
          }};
}

void add_op_cases(std::vector<GradCase>& s) {
  for (int stride : {1, 2})
    for (int pad : {0, 1}) {
      s.push_back(op_case("conv2d_s" + std::to_string(stride) + "_p" + std::to_string(pad),
                          [=](const auto& in) { return conv2d(in[0], in[1], in[2], stride, pad); },
                          uniform_inputs({{2, 3, 6, 5}, {4, 3, 3, 3}, {4}})));
    }
  s.push_back(op_case("layer_norm", [](const auto& in) { return layer_norm(in[0], in[1], in[2]); },
                      uniform_inputs({{2, 4, 3, 3}, {4}, {4}})));
  s.push_back(op_case("simple_gate", [](const auto& in) { return simple_gate(in[0]); },
                      uniform_inputs({{1, 6, 2, 3}})));
  s.push_back(op_case("pixel_shuffle", [](const auto& in) { return mul(pixel_shuffle(in[0], 2), in[1]); },
                      uniform_inputs({{1, 8, 3, 3}, {1, 2, 6, 6}})));
  for (auto [h, w] : {std::pair{2, 3}, {9, 7}, {4, 4}}) {
    s.push_back(op_case("bilinear_" + std::to_string(h) + "x" + std::to_string(w),
                        [=](const auto& in) { return mul(bilinear_resize(in[0], h, w), in[1]); },
                        uniform_inputs({{1, 2, 4, 5}, {1, 2, h, w}})));
  }
  s.push_back(op_case("reflect_pad", [](const auto& in) { return mul(reflect_pad(in[0], 1, 2, 2, 1), in[1]); },
                      uniform_inputs({{1, 2, 4, 5}, {1, 2, 7, 8}})));
  s.push_back(op_case("crop", [](const auto& in) { return mul(crop(in[0], 1, 2, 3, 2), in[1]); },
                      uniform_inputs({{1, 2, 5, 5}, {1, 2, 3, 2}})));
  s.push_back(op_case(
      "concat_slice",
      [](const auto& in) { return mul(slice_channels(concat_channels(in[0], in[1]), 1, 3), in[2]); },
      uniform_inputs({{1, 2, 3, 3}, {1, 3, 3, 3}, {1, 3, 3, 3}})));

  s.push_back(op_case("add_mul", [](const auto& in) { return mul(add(in[0], in[1]), in[2]); },
                      uniform_inputs({{1, 2, 3, 3}, {1, 2, 3, 3}, {1, 2, 3, 3}})));
  s.push_back(op_case("sub_mul", [](const auto& in) { return mul(sub(in[0], in[1]), in[0]); },
                      uniform_inputs({{1, 2, 3, 3}, {1, 2, 3, 3}})));
  s.push_back(op_case("div", [](const auto& in) { return div(in[0], in[1]); }, [](std::uint64_t seed) {
    return std::vector<Tensor>{uniform({1, 2, 3, 3}, seed), uniform({1, 2, 3, 3}, seed + 99, 0.5F, 2.0F)};
  }));
  s.push_back(op_case("scale_add_scalar",
                      [](const auto& in) { return mul(scale(add_scalar(in[0], 0.3F), -1.7F), in[0]); },
                      uniform_inputs({{1, 2, 3, 3}})));
  s.push_back(op_case("gelu", [](const auto& in) { return mul(gelu(in[0]), in[1]); },
                      uniform_inputs({{1, 3, 3, 3}, {1, 3, 3, 3}})));
  s.push_back(op_case("softplus", [](const auto& in) { return mul(softplus(in[0]), in[1]); },
                      uniform_inputs({{1, 3, 3, 3}, {1, 3, 3, 3}})));
  s.push_back(op_case("hypot_eps", [](const auto& in) { return hypot_eps(in[0], in[1], 1e-6F); },
                      [](std::uint64_t seed) {
                        return std::vector<Tensor>{signed_away_from_zero({1, 2, 3, 3}, seed, 0.2F, 1.0F),
                                                   uniform({1, 2, 3, 3}, seed + 5)};
                      }));
  s.push_back(op_case("clip", [](const auto& in) { return mul(clip(in[0], -0.5F, 0.5F), in[1]); },
                      [](std::uint64_t seed) {
                        // Magnitudes avoid the bounds at +-0.5.
                        Tensor x = signed_away_from_zero({1, 2, 4, 4}, seed, 0.05F, 0.9F);
                        for (auto& v : x.data()) {
                          if (std::abs(std::abs(v) - 0.5F) < 0.05F) v *= 0.5F;
                        }
                        return std::vector<Tensor>{x, uniform({1, 2, 4, 4}, seed + 3)};
                      }));
  s.push_back(op_case("mean_abs_diff", [](const auto& in) { return mean_abs_diff(in[0], in[1]); },
                      [](std::uint64_t seed) {
                        const Tensor b = uniform({1, 2, 3, 3}, seed);
                        return std::vector<Tensor>{
                            add(b, signed_away_from_zero({1, 2, 3, 3}, seed + 7, 0.05F, 0.5F)), b};
                      }));
  s.push_back(op_case("sum", [](const auto& in) { return sum(mul(in[0], in[0])); },
                      uniform_inputs({{1, 2, 3, 3}})));

  for (auto [h, w] : {std::pair{4, 4}, {5, 6}, {7, 3}}) {
    const auto tag = std::to_string(h) + "x" + std::to_string(w);
    s.push_back(op_case(
        "fft2_" + tag,
        [](const auto& in) {
          const Spectrum sp = fft2(in[0]);
          return add(mul(sp.real, in[1]), mul(sp.imag, in[2]));
        },
        uniform_inputs({{1, 2, h, w}, {1, 2, h, w}, {1, 2, h, w}})));
    s.push_back(op_case("ifft2_" + tag,
                        [](const auto& in) { return mul(ifft2(Spectrum{in[0], in[1]}), in[2]); },
                        uniform_inputs({{1, 2, h, w}, {1, 2, h, w}, {1, 2, h, w}})));
  }
  s.push_back(op_case(
      "decompose",
      [](const auto& in) {
        const AmpPhase ap = decompose(Spectrum{in[0], in[1]});
        return add(mul(ap.amplitude, in[2]), mul(ap.phase, in[3]));
      },
      [](std::uint64_t seed) {
        // |imag| >= 0.1 keeps the phase away from its branch cut.
        return std::vector<Tensor>{uniform({1, 2, 3, 3}, seed),
                                   signed_away_from_zero({1, 2, 3, 3}, seed + 1, 0.1F, 1.0F),
                                   uniform({1, 2, 3, 3}, seed + 2), uniform({1, 2, 3, 3}, seed + 3)};
      }));
  s.push_back(op_case(
      "recompose",
      [](const auto& in) {
        const Spectrum sp = recompose(AmpPhase{in[0], in[1]});
        return add(mul(sp.real, in[2]), mul(sp.imag, in[3]));
      },
      [](std::uint64_t seed) {
        return std::vector<Tensor>{uniform({1, 2, 3, 3}, seed, 0.1F, 1.0F),
                                   uniform({1, 2, 3, 3}, seed + 1, -3.0F, 3.0F),
                                   uniform({1, 2, 3, 3}, seed + 2), uniform({1, 2, 3, 3}, seed + 3)};
      }));
  s.push_back(op_case(
      "snr_fuse", [](const auto& in) { return mul(snr_fuse(BranchOutputs{in[0], in[1]}, in[2]), in[3]); },
      [](std::uint64_t seed) {
        return std::vector<Tensor>{uniform({2, 3, 4, 4}, seed), uniform({2, 3, 4, 4}, seed + 1),
                                   uniform({2, 1, 4, 4}, seed + 2, 0.0F, 1.0F),
                                   uniform({2, 3, 4, 4}, seed + 3)};
      }));
  s.push_back(op_case("sobel_magnitude", [](const auto& in) { return mul(sobel_magnitude(in[0]), in[1]); },
                      uniform_inputs({{1, 3, 5, 6}, {1, 3, 5, 6}})));
}

// Default initialization with the two identity heads replaced by small random
// weights, so every path carries gradient at a realistic conditioning.
WeightStore live_weights(const ModelConfig& cfg, std::uint64_t seed) {
  WeightStore w = init_weights(cfg, seed);
  std::mt19937_64 rng(seed + 12345);
  std::uniform_real_distribution<float> d(-0.05F, 0.05F);
  for (const auto& e : w.entries()) {
    if (e.name != "fie.conv_out.weight" && e.name != "den.head.weight") continue;
    Tensor t = e.tensor;
    for (auto& v : t.data()) v = d(rng);
  }
  return w;
}

std::vector<NamedTensor> named_params(const WeightStore& w, const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (const auto& e : w.entries()) {
    if (e.name.rfind(prefix, 0) == 0) out.push_back({e.name, e.tensor});
  }
  return out;
}

// Whole stages run dozens of float32 layers, so a single-element difference
// at h = 1e-3 sits at the rounding floor of the loss. Each tensor is instead
// moved along unit directions with Richardson-extrapolated differences, which
// lets h grow to 1e-2 or beyond without truncation error.
GradCheckOptions stage_options(std::uint64_t seed, double step = 1e-2) {
  GradCheckOptions opts;
  opts.directional = true;
  opts.richardson = true;
  opts.step = step;
  opts.probe_seed = seed;
  return opts;
}

// A fixed random readout, so the checked scalar is not a plain sum.
Tensor readout(const Shape& shape, std::uint64_t seed) { return uniform(shape, seed + 777); }

// A ramp with mild noise: a pure-noise guide drives the SNR map to ~0 and
// starves the spatial branch of gradient.
Tensor smooth_guide(std::uint64_t seed) {
  Tensor g = uniform({1, 3, 16, 16}, seed, -0.05F, 0.05F);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) g.at(0, c, i, j) += 0.2F + 0.01F * (i + j) * (1.0F + 0.5F * c);
  return g;
}

GradCheckResult fie_block_case(std::uint64_t seed) {
  const ModelConfig cfg;
  const WeightStore w = live_weights(cfg, seed);
  const auto block = FieBlockParams::bind(w, "fie.block0");
  const Tensor z = uniform({1, cfg.nc, 5, 6}, seed);
  const Tensor proj = readout(z.shape(), seed);
  auto params = named_params(w, "fie.block0.");
  params.push_back({"z", z});
  return grad_check([&] { return mul(fie_block(z, block), proj); }, params, stage_options(seed));
}

GradCheckResult illumination_case(std::uint64_t seed) {
  const ModelConfig cfg;
  const WeightStore w = live_weights(cfg, seed);
  const auto p = FieParams::bind(w, cfg.fie_blocks, cfg.map_epsilon);
  const Tensor x = uniform({1, 3, 8, 8}, seed, 0.05F, 0.5F);
  const Tensor proj = readout(x.shape(), seed);
  auto params = named_params(w, "fie.");
  params.push_back({"x", x});
  return grad_check([&] { return mul(enhance_illumination(x, p).x_lol_raw, proj); }, params,
                    stage_options(seed));
}

// The SNR map is a detached function of x_lol, so x_lol is probed only when
// it lies entirely above 1: the clipped guide is then constant. The denoiser's
// deep-parameter gradients are small next to its rounding floor, hence h = 7e-2.
GradCheckResult denoiser_case(std::uint64_t seed, SkipMode mode, bool bright_guide) {
  ModelConfig cfg;
  cfg.skip_mode = mode;
  const WeightStore w = live_weights(cfg, seed);
  const auto p = DenoiserParams::bind(w, cfg);
  const Tensor x = uniform({1, 3, 16, 16}, seed, 0.0F, 0.1F);
  const Tensor proj = readout(x.shape(), seed);
  const auto opts = stage_options(seed, 7e-2);
  if (bright_guide) {
    const Tensor bright = uniform({1, 3, 16, 16}, seed + 2, 1.1F, 2.0F);
    return grad_check([&] { return mul(run_denoiser(x, bright, p).x_hat_raw, proj); },
                      {{"x_lol", bright}}, opts);
  }
  const Tensor x_lol = smooth_guide(seed + 1);
  auto params = named_params(w, "den.");
  params.push_back({"x", x});
  return grad_check([&] { return mul(run_denoiser(x, x_lol, p).x_hat_raw, proj); }, params, opts);
}

// Every term has kinks where prediction meets target. The prediction is a
// flat target plus a steep diagonal ramp, so residuals stay >= 0.04 and
// Sobel magnitudes differ by > 0.5 away from the corners, where both are
// pinned at epsilon by the reflect padding.
GradCheckResult total_loss_case(std::uint64_t seed) {
  const Tensor gt = uniform({1, 3, 6, 7}, seed, 0.49F, 0.51F);
  Tensor x_hat = uniform(gt.shape(), seed + 1, -0.01F, 0.01F);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 7; ++j) x_hat.at(0, c, i, j) += gt.at(0, c, i, j) + 0.05F + 0.1F * (i + j);
  const Tensor x_lol = add(gt, signed_away_from_zero(gt.shape(), seed + 2, 0.05F, 0.3F));
  return grad_check([&] { return total_loss(x_hat, x_lol, gt, 0.1).total; },
                    {{"x_hat", x_hat}, {"x_lol", x_lol}}, stage_options(seed));
}

}  // namespace

std::vector<GradCase> gradient_suite() {
  std::vector<GradCase> s;
  add_op_cases(s);
  s.push_back({"fie_block", fie_block_case});
  s.push_back({"illumination_stage", illumination_case});
  s.push_back({"denoiser_concat", [](auto seed) { return denoiser_case(seed, SkipMode::kConcat, false); }});
  s.push_back({"denoiser_add", [](auto seed) { return denoiser_case(seed, SkipMode::kAdd, false); }});
  s.push_back({"denoiser_concat_guide",
               [](auto seed) { return denoiser_case(seed, SkipMode::kConcat, true); }});
  s.push_back({"denoiser_add_guide", [](auto seed) { return denoiser_case(seed, SkipMode::kAdd, true); }});
  s.push_back({"total_loss", total_loss_case});
  return s;
}

}  // namespace flol::test
