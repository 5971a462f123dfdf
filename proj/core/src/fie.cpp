// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/fie.hpp"

#include <algorithm>
#include <stdexcept>

#include "flol/ops.hpp"
#include "flol/spectral.hpp"

namespace flol {

FreMlpParams FreMlpParams::bind(const WeightStore& store, const std::string& prefix) {
  return {store.get(prefix + ".conv1.weight"), store.get(prefix + ".conv1.bias"),
          store.get(prefix + ".conv2.weight"), store.get(prefix + ".conv2.bias")};
}

FieBlockParams FieBlockParams::bind(const WeightStore& store, const std::string& prefix) {
  FieBlockParams p;
  p.norm1_gamma = store.get(prefix + ".norm1.gamma");
  p.norm1_beta = store.get(prefix + ".norm1.beta");
  p.fre_mlp = FreMlpParams::bind(store, prefix + ".fre_mlp");
  p.norm2_gamma = store.get(prefix + ".norm2.gamma");
  p.norm2_beta = store.get(prefix + ".norm2.beta");
  p.expand_weight = store.get(prefix + ".ffn.expand.weight");
  p.expand_bias = store.get(prefix + ".ffn.expand.bias");
  p.project_weight = store.get(prefix + ".ffn.project.weight");
  p.project_bias = store.get(prefix + ".ffn.project.bias");
  return p;
}

FieParams FieParams::bind(const WeightStore& store, int blocks, float map_epsilon) {
  FieParams p;
  p.conv_in_weight = store.get("fie.conv_in.weight");
  p.conv_in_bias = store.get("fie.conv_in.bias");
  for (int i = 0; i < blocks; ++i) {
    p.blocks.push_back(FieBlockParams::bind(store, "fie.block" + std::to_string(i)));
  }
  p.conv_out_weight = store.get("fie.conv_out.weight");
  p.conv_out_bias = store.get("fie.conv_out.bias");
  p.map_epsilon = map_epsilon;
  return p;
}

Tensor fre_mlp(const Tensor& z, const FreMlpParams& p) {
  const auto c = z.dim(1);
  const Spectrum s = fft2(z);
  Tensor h = concat_channels(s.real, s.imag);
  h = conv2d(h, p.conv1_weight, p.conv1_bias);
  h = gelu(h);
  h = conv2d(h, p.conv2_weight, p.conv2_bias);
  return ifft2(Spectrum{slice_channels(h, 0, c), slice_channels(h, c, c)});
}

Tensor fie_block(const Tensor& z, const FieBlockParams& p) {
  const Tensor z1 = add(fre_mlp(layer_norm(z, p.norm1_gamma, p.norm1_beta), p.fre_mlp), z);
  Tensor f = layer_norm(z1, p.norm2_gamma, p.norm2_beta);
  f = conv2d(f, p.expand_weight, p.expand_bias);
  f = simple_gate(f);
  f = conv2d(f, p.project_weight, p.project_bias);
  return add(f, z1);
}

ModuleMap estimate_module_map(const Tensor& x_half, const FieParams& p) {
  Tensor h = conv2d(x_half, p.conv_in_weight, p.conv_in_bias, 1, 1);
  for (const auto& block : p.blocks) h = fie_block(h, block);
  h = conv2d(h, p.conv_out_weight, p.conv_out_bias, 1, 1);
  return ModuleMap{add_scalar(softplus(h), p.map_epsilon), p.map_epsilon};
}

IlluminationResult enhance_illumination(const Tensor& x, const FieParams& p,
                                        const IlluminationOptions& options) {
  if (!x.defined() || x.rank() != 4 || x.dim(1) != 3) {
    throw DimensionError("enhance_illumination: expected (N,3,H,W) input");
  }
  const auto h = x.dim(2);
  const auto w = x.dim(3);
  if (h < 2 || w < 2) throw DimensionError("enhance_illumination: H and W must be >= 2");

  const AmpPhase ap = decompose(fft2(x));
  IlluminationResult result;
  Tensor divisor;
  if (options.forced_map) {
    result.map = ModuleMap{Tensor::full(x.shape(), *options.forced_map), p.map_epsilon};
    divisor = result.map.values;
  } else {
    result.map = estimate_module_map(bilinear_resize(x, h / 2, w / 2), p);
    divisor = bilinear_resize(result.map.values, h, w);
  }
  const auto dv = divisor.data();
  if (*std::min_element(dv.begin(), dv.end()) < std::min(p.map_epsilon, 1.0F) * 0.999F) {
    throw std::logic_error("enhance_illumination: module map fell below its epsilon floor");
  }
  const Tensor amplitude = div(ap.amplitude, divisor);
  result.x_lol_raw = ifft2(recompose(AmpPhase{amplitude, ap.phase}));
  result.x_lol = clip(result.x_lol_raw, 0.0F, 1.0F);
  return result;
}

}  // namespace flol
