// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace flol {
namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

// Upper bound on im2col buffer size in floats; rows are tiled to stay below it.
constexpr std::int64_t kColBudget = 1 << 19;

void require_rank4(const Tensor& t, const char* op) {
  if (!t.defined() || t.rank() != 4) {
    throw DimensionError(std::string(op) + ": expected a 4-D (N,C,H,W) tensor, got " +
                         (t.defined() ? shape_str(t.shape()) : std::string("undefined")));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

std::uint64_t u64(std::int64_t v) { return static_cast<std::uint64_t>(v); }

struct ConvGeometry {
  std::int64_t n, cin, h, w, cout, kh, kw, ho, wo;
  int stride, pad;
  std::int64_t k() const { return cin * kh * kw; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

void im2col(const float* in, const ConvGeometry& g, std::int64_t oy0, std::int64_t rows,
            float* col) {
  const std::int64_t cols = rows * g.wo;
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        float* dst = col + ((c * g.kh + ky) * g.kw + kx) * cols;
        // valid ox satisfy 0 <= ox*stride - pad + kx < w
        const std::int64_t lo = std::clamp<std::int64_t>(
            (g.pad - kx + g.stride - 1) / g.stride, 0, g.wo);
        const std::int64_t hi = std::clamp<std::int64_t>(
            (g.w + g.pad - kx + g.stride - 1) / g.stride, lo, g.wo);
        for (std::int64_t r = 0; r < rows; ++r) {
          float* drow = dst + r * g.wo;
          const std::int64_t iy = (oy0 + r) * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) {
            std::fill(drow, drow + g.wo, 0.0F);
            continue;
          }
          const float* src = in + (c * g.h + iy) * g.w;
          std::fill(drow, drow + lo, 0.0F);
          if (g.stride == 1) {
            std::memcpy(drow + lo, src + lo - g.pad + kx,
                        static_cast<std::size_t>(hi - lo) * sizeof(float));
          } else {
            for (std::int64_t ox = lo; ox < hi; ++ox) drow[ox] = src[ox * g.stride - g.pad + kx];
          }
          std::fill(drow + hi, drow + g.wo, 0.0F);
        }
      }
    }
  }
}

void col2im_add(const float* col, const ConvGeometry& g, std::int64_t oy0, std::int64_t rows,
                float* in_grad) {
  const std::int64_t cols = rows * g.wo;
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        const float* src = col + ((c * g.kh + ky) * g.kw + kx) * cols;
        const std::int64_t lo = std::clamp<std::int64_t>(
            (g.pad - kx + g.stride - 1) / g.stride, 0, g.wo);
        const std::int64_t hi = std::clamp<std::int64_t>(
            (g.w + g.pad - kx + g.stride - 1) / g.stride, lo, g.wo);
        for (std::int64_t r = 0; r < rows; ++r) {
          const std::int64_t iy = (oy0 + r) * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          const float* srow = src + r * g.wo;
          float* dst = in_grad + (c * g.h + iy) * g.w;
          for (std::int64_t ox = lo; ox < hi; ++ox) dst[ox * g.stride - g.pad + kx] += srow[ox];
        }
      }
    }
  }
}

std::int64_t rows_per_tile(const ConvGeometry& g) {
  return std::clamp<std::int64_t>(kColBudget / std::max<std::int64_t>(1, g.k() * g.wo), 1, g.ho);
}

void conv_forward(const float* in, const float* w, const float* b, const ConvGeometry& g,
                  float* out) {
  const std::int64_t plane_in = g.cin * g.h * g.w;
  const std::int64_t hw_out = g.ho * g.wo;
  CMapR wm(w, g.cout, g.k());
  std::vector<float> col;
  for (std::int64_t n = 0; n < g.n; ++n) {
    const float* in_n = in + n * plane_in;
    MapR out_n(out + n * g.cout * hw_out, g.cout, hw_out);
    if (g.pointwise()) {
      out_n.noalias() = wm * CMapR(in_n, g.cin, hw_out);
    } else {
      const std::int64_t tile = rows_per_tile(g);
      col.resize(static_cast<std::size_t>(g.k() * tile * g.wo));
      for (std::int64_t oy0 = 0; oy0 < g.ho; oy0 += tile) {
        const std::int64_t rows = std::min(tile, g.ho - oy0);
        im2col(in_n, g, oy0, rows, col.data());
        out_n.middleCols(oy0 * g.wo, rows * g.wo).noalias() =
            wm * CMapR(col.data(), g.k(), rows * g.wo);
      }
    }
    if (b != nullptr) {
      for (std::int64_t co = 0; co < g.cout; ++co) {
        float* row = out + (n * g.cout + co) * hw_out;
        const float bias = b[co];
        for (std::int64_t i = 0; i < hw_out; ++i) row[i] += bias;
      }
    }
  }
}

void conv_backward(const float* in, const float* w, const float* gout, const ConvGeometry& g,
                   float* gin, float* gw, float* gb) {
  const std::int64_t plane_in = g.cin * g.h * g.w;
  const std::int64_t hw_out = g.ho * g.wo;
  CMapR wm(w, g.cout, g.k());
  std::vector<float> col;
  std::vector<float> dcol;
  for (std::int64_t n = 0; n < g.n; ++n) {
    const float* in_n = in + n * plane_in;
    CMapR gout_n(gout + n * g.cout * hw_out, g.cout, hw_out);
    if (gb != nullptr) {
      for (std::int64_t co = 0; co < g.cout; ++co) {
        const float* row = gout + (n * g.cout + co) * hw_out;
        double acc = 0.0;
        for (std::int64_t i = 0; i < hw_out; ++i) acc += row[i];
        gb[co] += static_cast<float>(acc);
      }
    }
    if (g.pointwise()) {
      CMapR in_m(in_n, g.cin, hw_out);
      if (gw != nullptr) MapR(gw, g.cout, g.k()).noalias() += gout_n * in_m.transpose();
      if (gin != nullptr) {
        MapR(gin + n * plane_in, g.cin, hw_out).noalias() += wm.transpose() * gout_n;
      }
      continue;
    }
    const std::int64_t tile = rows_per_tile(g);
    col.resize(static_cast<std::size_t>(g.k() * tile * g.wo));
    dcol.resize(col.size());
    for (std::int64_t oy0 = 0; oy0 < g.ho; oy0 += tile) {
      const std::int64_t rows = std::min(tile, g.ho - oy0);
      const std::int64_t cols = rows * g.wo;
      auto gblk = gout_n.middleCols(oy0 * g.wo, cols);
      if (gw != nullptr) {
        im2col(in_n, g, oy0, rows, col.data());
        MapR(gw, g.cout, g.k()).noalias() += gblk * CMapR(col.data(), g.k(), cols).transpose();
      }
      if (gin != nullptr) {
        MapR dc(dcol.data(), g.k(), cols);
        dc.noalias() = wm.transpose() * gblk;
        col2im_add(dcol.data(), g, oy0, rows, gin + n * plane_in);
      }
    }
  }
}

template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const Tensor& x, const char* name, Fwd fwd, Bwd dfdx) {
  Tensor out(x.shape());
  const auto xi = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < xi.size(); ++i) o[i] = fwd(xi[i]);
  add_flops(u64(x.numel()));
  check_finite(out, name);
  if (should_record({&x})) {
    GradTape::active()->record(name, {x}, {out}, [x, out, dfdx]() mutable {
      if (!x.requires_grad()) return;
      const auto go = out.grad();
      const auto xv = x.data();
      auto gx = x.ensure_grad();
      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * dfdx(xv[i]);
    });
  }
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
  require_rank4(input, "conv2d");
  require_rank4(weight, "conv2d weight");
  if (stride < 1) throw ArgumentError("conv2d: stride must be >= 1");
  if (padding < 0) throw ArgumentError("conv2d: padding must be >= 0");
  ConvGeometry g{};
  g.n = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = stride;
  g.pad = padding;
  if (weight.dim(1) != g.cin) {
    throw DimensionError("conv2d: input has " + std::to_string(g.cin) +
                         " channels but weight expects " + std::to_string(weight.dim(1)));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.cout)) {
    throw DimensionError("conv2d: bias shape " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(g.cout) + " output channels");
  }
  if (g.h + 2 * padding < g.kh || g.w + 2 * padding < g.kw) {
    throw DimensionError("conv2d: kernel larger than padded input");
  }
  g.ho = (g.h + 2 * padding - g.kh) / stride + 1;
  g.wo = (g.w + 2 * padding - g.kw) / stride + 1;

  Tensor out(Shape{g.n, g.cout, g.ho, g.wo});
  conv_forward(input.ptr(), weight.ptr(), bias.defined() ? bias.ptr() : nullptr, g, out.ptr());
  add_flops(2 * u64(g.n * g.cout * g.k() * g.ho * g.wo) +
            (bias.defined() ? u64(out.numel()) : 0));
  check_finite(out, "conv2d");

  if (should_record({&input, &weight, &bias})) {
    GradTape::active()->record(
        "conv2d", {input, weight, bias}, {out}, [input, weight, bias, out, g]() mutable {
          float* gin = input.requires_grad() ? input.ensure_grad().data() : nullptr;
          float* gw = weight.requires_grad() ? weight.ensure_grad().data() : nullptr;
          float* gb = bias.defined() && bias.requires_grad() ? bias.ensure_grad().data() : nullptr;
          conv_backward(input.ptr(), weight.ptr(), out.grad().data(), g, gin, gw, gb);
        });
  }
  return out;
}

Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, float eps) {
  require_rank4(input, "layer_norm");
  if (!(eps > 0.0F)) throw ArgumentError("layer_norm: eps must be > 0");
  const auto n = input.dim(0);
  const auto c = input.dim(1);
  const auto hw = input.dim(2) * input.dim(3);
  if (c < 1) throw DimensionError("layer_norm: needs at least one channel");
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw DimensionError("layer_norm: affine parameters must have shape (" + std::to_string(c) +
                         "), got " + shape_str(gamma.shape()) + " and " +
                         shape_str(beta.shape()));
  }
  Tensor out(input.shape());
  Tensor xhat(input.shape());
  std::vector<float> rstd(static_cast<std::size_t>(n * hw));
  std::vector<double> mean(static_cast<std::size_t>(hw));
  std::vector<double> var(static_cast<std::size_t>(hw));
  const float* x = input.ptr();
  const float* gm = gamma.ptr();
  const float* bt = beta.ptr();
  float* xh = xhat.ptr();
  float* y = out.ptr();
  for (std::int64_t b = 0; b < n; ++b) {
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(var.begin(), var.end(), 0.0);
    const float* xb = x + b * c * hw;
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t i = 0; i < hw; ++i) mean[i] += xb[ch * hw + i];
    }
    for (auto& m : mean) m /= static_cast<double>(c);
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t i = 0; i < hw; ++i) {
        const double d = xb[ch * hw + i] - mean[i];
        var[i] += d * d;
      }
    }
    float* rs = rstd.data() + b * hw;
    for (std::int64_t i = 0; i < hw; ++i) {
      rs[i] = static_cast<float>(1.0 / std::sqrt(var[i] / static_cast<double>(c) + eps));
    }
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t i = 0; i < hw; ++i) {
        const std::int64_t idx = (b * c + ch) * hw + i;
        xh[idx] = static_cast<float>((xb[ch * hw + i] - mean[i]) * rs[i]);
        y[idx] = xh[idx] * gm[ch] + bt[ch];
      }
    }
  }
  add_flops(u64(input.numel()));
  check_finite(out, "layer_norm");

  if (should_record({&input, &gamma, &beta})) {
    GradTape::active()->record(
        "layer_norm", {input, gamma, beta}, {out},
        [input, gamma, beta, out, xhat, rstd = std::move(rstd), n, c, hw]() mutable {
          const float* go = out.grad().data();
          const float* xh = xhat.ptr();
          if (gamma.requires_grad() || beta.requires_grad()) {
            float* gg = gamma.requires_grad() ? gamma.ensure_grad().data() : nullptr;
            float* gbt = beta.requires_grad() ? beta.ensure_grad().data() : nullptr;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              double sg = 0.0;
              double sb = 0.0;
              for (std::int64_t b = 0; b < n; ++b) {
                for (std::int64_t i = 0; i < hw; ++i) {
                  const std::int64_t idx = (b * c + ch) * hw + i;
                  sg += static_cast<double>(go[idx]) * xh[idx];
                  sb += go[idx];
                }
              }
              if (gg) gg[ch] += static_cast<float>(sg);
              if (gbt) gbt[ch] += static_cast<float>(sb);
            }
          }
          if (!input.requires_grad()) return;
          float* gx = input.ensure_grad().data();
          const float* gm = gamma.ptr();
          std::vector<double> m1(static_cast<std::size_t>(hw));
          std::vector<double> m2(static_cast<std::size_t>(hw));
          for (std::int64_t b = 0; b < n; ++b) {
            std::fill(m1.begin(), m1.end(), 0.0);
            std::fill(m2.begin(), m2.end(), 0.0);
            for (std::int64_t ch = 0; ch < c; ++ch) {
              for (std::int64_t i = 0; i < hw; ++i) {
                const std::int64_t idx = (b * c + ch) * hw + i;
                const double dxh = static_cast<double>(go[idx]) * gm[ch];
                m1[i] += dxh;
                m2[i] += dxh * xh[idx];
              }
            }
            const float* rs = rstd.data() + b * hw;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              for (std::int64_t i = 0; i < hw; ++i) {
                const std::int64_t idx = (b * c + ch) * hw + i;
                const double dxh = static_cast<double>(go[idx]) * gm[ch];
                gx[idx] += static_cast<float>(
                    rs[i] * (dxh - m1[i] / static_cast<double>(c) -
                             xh[idx] * m2[i] / static_cast<double>(c)));
              }
            }
          }
        });
  }
  return out;
}

Tensor simple_gate(const Tensor& input) {
  require_rank4(input, "simple_gate");
  const auto c2 = input.dim(1);
  if (c2 % 2 != 0) {
    throw DimensionError("simple_gate: channel count must be even, got " + std::to_string(c2));
  }
  const auto n = input.dim(0);
  const auto c = c2 / 2;
  const auto hw = input.dim(2) * input.dim(3);
  Tensor out(Shape{n, c, input.dim(2), input.dim(3)});
  const float* x = input.ptr();
  float* y = out.ptr();
  for (std::int64_t b = 0; b < n; ++b) {
    const float* first = x + b * c2 * hw;
    const float* second = first + c * hw;
    float* yb = y + b * c * hw;
    for (std::int64_t i = 0; i < c * hw; ++i) yb[i] = first[i] * second[i];
  }
  add_flops(u64(out.numel()));
  check_finite(out, "simple_gate");
  if (should_record({&input})) {
    GradTape::active()->record("simple_gate", {input}, {out}, [input, out, n, c, hw]() mutable {
      const float* go = out.grad().data();
      const float* x = input.ptr();
      float* gx = input.ensure_grad().data();
      for (std::int64_t b = 0; b < n; ++b) {
        const std::int64_t base = b * 2 * c * hw;
        for (std::int64_t i = 0; i < c * hw; ++i) {
          const float g = go[b * c * hw + i];
          gx[base + i] += g * x[base + c * hw + i];
          gx[base + c * hw + i] += g * x[base + i];
        }
      }
    });
  }
  return out;
}

Tensor pixel_shuffle(const Tensor& input, int r) {
  require_rank4(input, "pixel_shuffle");
  if (r < 1) throw ArgumentError("pixel_shuffle: upscale factor must be >= 1");
  const auto n = input.dim(0);
  const auto cin = input.dim(1);
  const auto h = input.dim(2);
  const auto w = input.dim(3);
  const std::int64_t rr = static_cast<std::int64_t>(r) * r;
  if (cin % rr != 0) {
    throw DimensionError("pixel_shuffle: " + std::to_string(cin) +
                         " channels not divisible by r^2 = " + std::to_string(rr));
  }
  const auto c = cin / rr;
  Tensor out(Shape{n, c, h * r, w * r});
  const float* x = input.ptr();
  float* y = out.ptr();
  const auto index = [=](std::int64_t b, std::int64_t ch, std::int64_t i, std::int64_t j,
                         std::int64_t yy, std::int64_t xx) {
    const std::int64_t src = ((b * cin + ch * rr + i * r + j) * h + yy) * w + xx;
    const std::int64_t dst = ((b * c + ch) * h * r + yy * r + i) * (w * r) + xx * r + j;
    return std::pair{src, dst};
  };
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < r; ++j)
          for (std::int64_t yy = 0; yy < h; ++yy)
            for (std::int64_t xx = 0; xx < w; ++xx) {
              const auto [src, dst] = index(b, ch, i, j, yy, xx);
              y[dst] = x[src];
            }
  if (should_record({&input})) {
    GradTape::active()->record("pixel_shuffle", {input}, {out},
                               [input, out, n, c, r, h, w, index]() mutable {
                                 const float* go = out.grad().data();
                                 float* gx = input.ensure_grad().data();
                                 for (std::int64_t b = 0; b < n; ++b)
                                   for (std::int64_t ch = 0; ch < c; ++ch)
                                     for (std::int64_t i = 0; i < r; ++i)
                                       for (std::int64_t j = 0; j < r; ++j)
                                         for (std::int64_t yy = 0; yy < h; ++yy)
                                           for (std::int64_t xx = 0; xx < w; ++xx) {
                                             const auto [src, dst] = index(b, ch, i, j, yy, xx);
                                             gx[src] += go[dst];
                                           }
                               });
  }
  return out;
}

namespace {
struct LerpTap {
  std::int64_t i0, i1;
  float frac;
};

std::vector<LerpTap> lerp_taps(std::int64_t in, std::int64_t out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t i = 0; i < out; ++i) {
    const double src = std::max(0.0, (static_cast<double>(i) + 0.5) * ratio - 0.5);
    const auto i0 = std::min<std::int64_t>(static_cast<std::int64_t>(src), in - 1);
    const auto i1 = std::min<std::int64_t>(i0 + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {i0, i1, static_cast<float>(src - static_cast<double>(i0))};
  }
  return taps;
}
}  // namespace

Tensor bilinear_resize(const Tensor& input, std::int64_t out_h, std::int64_t out_w) {
  require_rank4(input, "bilinear_resize");
  if (out_h < 1 || out_w < 1) throw ArgumentError("bilinear_resize: output size must be >= 1");
  const auto planes = input.dim(0) * input.dim(1);
  const auto h = input.dim(2);
  const auto w = input.dim(3);
  if (h < 1 || w < 1) throw DimensionError("bilinear_resize: empty input");
  auto ty = lerp_taps(h, out_h);
  auto tx = lerp_taps(w, out_w);
  Tensor out(Shape{input.dim(0), input.dim(1), out_h, out_w});
  const float* x = input.ptr();
  float* y = out.ptr();
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* xp = x + p * h * w;
    float* yp = y + p * out_h * out_w;
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
      const auto& a = ty[static_cast<std::size_t>(oy)];
      const float* r0 = xp + a.i0 * w;
      const float* r1 = xp + a.i1 * w;
      for (std::int64_t ox = 0; ox < out_w; ++ox) {
        const auto& b = tx[static_cast<std::size_t>(ox)];
        const float top = r0[b.i0] + (r0[b.i1] - r0[b.i0]) * b.frac;
        const float bot = r1[b.i0] + (r1[b.i1] - r1[b.i0]) * b.frac;
        yp[oy * out_w + ox] = top + (bot - top) * a.frac;
      }
    }
  }
  add_flops(u64(out.numel()));
  check_finite(out, "bilinear_resize");
  if (should_record({&input})) {
    GradTape::active()->record(
        "bilinear_resize", {input}, {out},
        [input, out, planes, h, w, out_h, out_w, ty = std::move(ty), tx = std::move(tx)]() mutable {
          const float* go = out.grad().data();
          float* gx = input.ensure_grad().data();
          for (std::int64_t p = 0; p < planes; ++p) {
            float* gp = gx + p * h * w;
            const float* gop = go + p * out_h * out_w;
            for (std::int64_t oy = 0; oy < out_h; ++oy) {
              const auto& a = ty[static_cast<std::size_t>(oy)];
              for (std::int64_t ox = 0; ox < out_w; ++ox) {
                const auto& b = tx[static_cast<std::size_t>(ox)];
                const float g = gop[oy * out_w + ox];
                const float gt = g * (1.0F - a.frac);
                const float gbm = g * a.frac;
                gp[a.i0 * w + b.i0] += gt * (1.0F - b.frac);
                gp[a.i0 * w + b.i1] += gt * b.frac;
                gp[a.i1 * w + b.i0] += gbm * (1.0F - b.frac);
                gp[a.i1 * w + b.i1] += gbm * b.frac;
              }
            }
          }
        });
  }
  return out;
}

namespace {
enum class BinaryKind { kAdd, kSub, kMul, kDiv };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* name) {
  require_same_shape(a, b, name);
  Tensor out(a.shape());
  const auto av = a.data();
  const auto bv = b.data();
  auto o = out.data();
  switch (kind) {
    case BinaryKind::kAdd:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
      break;
    case BinaryKind::kSub:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
      break;
    case BinaryKind::kMul:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
      break;
    case BinaryKind::kDiv:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] / bv[i];
      break;
  }
  add_flops(u64(out.numel()));
  check_finite(out, name);
  if (should_record({&a, &b})) {
    GradTape::active()->record(name, {a, b}, {out}, [a, b, out, kind]() mutable {
      const auto go = out.grad();
      const auto av = a.data();
      const auto bv = b.data();
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < go.size(); ++i) {
          switch (kind) {
            case BinaryKind::kAdd:
            case BinaryKind::kSub: ga[i] += go[i]; break;
            case BinaryKind::kMul: ga[i] += go[i] * bv[i]; break;
            case BinaryKind::kDiv: ga[i] += go[i] / bv[i]; break;
          }
        }
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < go.size(); ++i) {
          switch (kind) {
            case BinaryKind::kAdd: gb[i] += go[i]; break;
            case BinaryKind::kSub: gb[i] -= go[i]; break;
            case BinaryKind::kMul: gb[i] += go[i] * av[i]; break;
            case BinaryKind::kDiv: gb[i] -= go[i] * av[i] / (bv[i] * bv[i]); break;
          }
        }
      }
    });
  }
  return out;
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kAdd, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kSub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kMul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kDiv, "div"); }

Tensor scale(const Tensor& a, float factor) {
  return unary_elementwise(
      a, "scale", [factor](float v) { return v * factor; }, [factor](float) { return factor; });
}

Tensor add_scalar(const Tensor& a, float value) {
  return unary_elementwise(
      a, "add_scalar", [value](float v) { return v + value; }, [](float) { return 1.0F; });
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return unary_elementwise(
      x, "gelu",
      [](float v) {
        const double d = v;
        return static_cast<float>(0.5 * d * (1.0 + std::erf(d * kInvSqrt2)));
      },
      [](float v) {
        const double d = v;
        const double cdf = 0.5 * (1.0 + std::erf(d * kInvSqrt2));
        return static_cast<float>(cdf + d * kInvSqrt2Pi * std::exp(-0.5 * d * d));
      });
}

Tensor softplus(const Tensor& x) {
  return unary_elementwise(
      x, "softplus",
      [](float v) {
        const double d = v;
        return static_cast<float>(d > 20.0 ? d : std::log1p(std::exp(d)));
      },
      [](float v) { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v)))); });
}

Tensor hypot_eps(const Tensor& a, const Tensor& b, float eps) {
  require_same_shape(a, b, "hypot_eps");
  if (!(eps > 0.0F)) throw ArgumentError("hypot_eps: eps must be > 0");
  Tensor out(a.shape());
  const auto av = a.data();
  const auto bv = b.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(av[i] * av[i] + bv[i] * bv[i] + eps);
  add_flops(u64(out.numel()));
  check_finite(out, "hypot_eps");
  if (should_record({&a, &b})) {
    GradTape::active()->record("hypot_eps", {a, b}, {out}, [a, b, out]() mutable {
      const auto go = out.grad();
      const auto ov = out.data();
      for (const Tensor* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        const auto tv = t->data();
        auto gt = t->ensure_grad();
        for (std::size_t i = 0; i < go.size(); ++i) gt[i] += go[i] * tv[i] / ov[i];
      }
    });
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank4(a, "concat_channels");
  require_rank4(b, "concat_channels");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw DimensionError("concat_channels: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const auto n = a.dim(0);
  const auto ca = a.dim(1);
  const auto cb = b.dim(1);
  const auto hw = a.dim(2) * a.dim(3);
  Tensor out(Shape{n, ca + cb, a.dim(2), a.dim(3)});
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.ptr() + i * ca * hw, ca * hw, out.ptr() + i * (ca + cb) * hw);
    std::copy_n(b.ptr() + i * cb * hw, cb * hw, out.ptr() + i * (ca + cb) * hw + ca * hw);
  }
  if (should_record({&a, &b})) {
    GradTape::active()->record("concat_channels", {a, b}, {out}, [a, b, out, n, ca, cb, hw]() mutable {
      const float* go = out.grad().data();
      for (std::int64_t i = 0; i < n; ++i) {
        if (a.requires_grad()) {
          float* ga = a.ensure_grad().data() + i * ca * hw;
          const float* src = go + i * (ca + cb) * hw;
          for (std::int64_t k = 0; k < ca * hw; ++k) ga[k] += src[k];
        }
        if (b.requires_grad()) {
          float* gb = b.ensure_grad().data() + i * cb * hw;
          const float* src = go + i * (ca + cb) * hw + ca * hw;
          for (std::int64_t k = 0; k < cb * hw; ++k) gb[k] += src[k];
        }
      }
    });
  }
  return out;
}

Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count) {
  require_rank4(x, "slice_channels");
  const auto c = x.dim(1);
  if (begin < 0 || count < 0 || begin + count > c) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + std::to_string(c) +
                         " channels");
  }
  const auto n = x.dim(0);
  const auto hw = x.dim(2) * x.dim(3);
  Tensor out(Shape{n, count, x.dim(2), x.dim(3)});
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(x.ptr() + (i * c + begin) * hw, count * hw, out.ptr() + i * count * hw);
  }
  if (should_record({&x})) {
    GradTape::active()->record("slice_channels", {x}, {out}, [x, out, n, c, begin, count, hw]() mutable {
      const float* go = out.grad().data();
      float* gx = x.ensure_grad().data();
      for (std::int64_t i = 0; i < n; ++i) {
        float* dst = gx + (i * c + begin) * hw;
        const float* src = go + i * count * hw;
        for (std::int64_t k = 0; k < count * hw; ++k) dst[k] += src[k];
      }
    });
  }
  return out;
}

Tensor clip(const Tensor& x, float lo, float hi) {
  if (lo > hi) throw ArgumentError("clip: lo > hi");
  return unary_elementwise(
      x, "clip", [lo, hi](float v) { return std::clamp(v, lo, hi); },
      [lo, hi](float v) { return (v >= lo && v <= hi) ? 1.0F : 0.0F; });
}

namespace {
std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}
}  // namespace

Tensor reflect_pad(const Tensor& x, std::int64_t top, std::int64_t bottom, std::int64_t left,
                   std::int64_t right) {
  require_rank4(x, "reflect_pad");
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ArgumentError("reflect_pad: negative padding");
  }
  const auto planes = x.dim(0) * x.dim(1);
  const auto h = x.dim(2);
  const auto w = x.dim(3);
  const auto oh = h + top + bottom;
  const auto ow = w + left + right;
  std::vector<std::int64_t> rows(static_cast<std::size_t>(oh));
  std::vector<std::int64_t> cols(static_cast<std::size_t>(ow));
  for (std::int64_t i = 0; i < oh; ++i) rows[static_cast<std::size_t>(i)] = reflect_index(i - top, h);
  for (std::int64_t j = 0; j < ow; ++j) cols[static_cast<std::size_t>(j)] = reflect_index(j - left, w);
  Tensor out(Shape{x.dim(0), x.dim(1), oh, ow});
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = x.ptr() + p * h * w;
    float* dst = out.ptr() + p * oh * ow;
    for (std::int64_t i = 0; i < oh; ++i) {
      const float* srow = src + rows[static_cast<std::size_t>(i)] * w;
      for (std::int64_t j = 0; j < ow; ++j) dst[i * ow + j] = srow[cols[static_cast<std::size_t>(j)]];
    }
  }
  if (should_record({&x})) {
    GradTape::active()->record(
        "reflect_pad", {x}, {out},
        [x, out, planes, h, w, oh, ow, rows = std::move(rows), cols = std::move(cols)]() mutable {
          const float* go = out.grad().data();
          float* gx = x.ensure_grad().data();
          for (std::int64_t p = 0; p < planes; ++p) {
            for (std::int64_t i = 0; i < oh; ++i) {
              float* grow = gx + p * h * w + rows[static_cast<std::size_t>(i)] * w;
              const float* srow = go + p * oh * ow + i * ow;
              for (std::int64_t j = 0; j < ow; ++j) grow[cols[static_cast<std::size_t>(j)]] += srow[j];
            }
          }
        });
  }
  return out;
}

Tensor crop(const Tensor& x, std::int64_t top, std::int64_t left, std::int64_t h, std::int64_t w) {
  require_rank4(x, "crop");
  const auto ih = x.dim(2);
  const auto iw = x.dim(3);
  if (top < 0 || left < 0 || h < 1 || w < 1 || top + h > ih || left + w > iw) {
    throw DimensionError("crop: window outside input " + shape_str(x.shape()));
  }
  const auto planes = x.dim(0) * x.dim(1);
  Tensor out(Shape{x.dim(0), x.dim(1), h, w});
  for (std::int64_t p = 0; p < planes; ++p) {
    for (std::int64_t i = 0; i < h; ++i) {
      std::copy_n(x.ptr() + (p * ih + top + i) * iw + left, w, out.ptr() + (p * h + i) * w);
    }
  }
  if (should_record({&x})) {
    GradTape::active()->record("crop", {x}, {out}, [x, out, planes, top, left, h, w, ih, iw]() mutable {
      const float* go = out.grad().data();
      float* gx = x.ensure_grad().data();
      for (std::int64_t p = 0; p < planes; ++p) {
        for (std::int64_t i = 0; i < h; ++i) {
          float* dst = gx + (p * ih + top + i) * iw + left;
          const float* src = go + (p * h + i) * w;
          for (std::int64_t j = 0; j < w; ++j) dst[j] += src[j];
        }
      }
    });
  }
  return out;
}

Tensor mean_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs_diff");
  const auto av = a.data();
  const auto bv = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::fabs(static_cast<double>(av[i]) - bv[i]);
  const double count = static_cast<double>(av.size());
  Tensor out = Tensor::scalar(static_cast<float>(acc / count));
  add_flops(u64(a.numel()));
  check_finite(out, "mean_abs_diff");
  if (should_record({&a, &b})) {
    GradTape::active()->record("mean_abs_diff", {a, b}, {out}, [a, b, out, count]() mutable {
      const float g = static_cast<float>(out.grad()[0] / count);
      const auto av = a.data();
      const auto bv = b.data();
      const auto sign = [](float d) { return d > 0.0F ? 1.0F : (d < 0.0F ? -1.0F : 0.0F); };
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * sign(av[i] - bv[i]);
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < av.size(); ++i) gb[i] -= g * sign(av[i] - bv[i]);
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  add_flops(u64(x.numel()));
  if (should_record({&x})) {
    GradTape::active()->record("sum", {x}, {out}, [x, out]() mutable {
      const float g = out.grad()[0];
      for (auto& v : x.ensure_grad()) v += g;
    });
  }
  return out;
}

}  // namespace flol
