// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace flol {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

std::vector<double> grayscale(const Tensor& t, std::int64_t& h, std::int64_t& w) {
  const auto& s = t.shape();
  std::int64_t c = 0;
  if (s.size() == 3) {
    c = s[0];
  } else if (s.size() == 4 && s[0] == 1) {
    c = s[1];
  } else {
    throw DimensionError("ssim: expected (C,H,W) or (1,C,H,W), got " + shape_str(s));
  }
  h = s[s.size() - 2];
  w = s[s.size() - 1];
  const auto d = t.data();
  std::vector<double> g(static_cast<std::size_t>(h * w), 0.0);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t i = 0; i < h * w; ++i) g[i] += d[ch * h * w + i];
  }
  for (auto& v : g) v /= static_cast<double>(c);
  return g;
}

std::array<double, kWindow> gaussian_1d() {
  std::array<double, kWindow> k{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    k[i] = std::exp(-(x * x) / (2.0 * kSigma * kSigma));
    total += k[i];
  }
  for (auto& v : k) v /= total;
  return k;
}

// Separable valid-mode filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, std::int64_t h, std::int64_t w,
                                 const std::array<double, kWindow>& k) {
  const auto ow = w - kWindow + 1;
  const auto oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h * ow));
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += k[i] * src[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh * ow));
  for (std::int64_t y = 0; y < oh; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b) {
  require_same(a, b, "psnr");
  const auto x = a.data();
  const auto y = b.data();
  if (x.empty()) throw DimensionError("psnr: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(x.size());
  if (mse < 1e-10) return kPsnrCap;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same(a, b, "ssim");
  std::int64_t h = 0;
  std::int64_t w = 0;
  const auto ga = grayscale(a, h, w);
  const auto gb = grayscale(b, h, w);
  if (h < kWindow || w < kWindow) {
    throw DimensionError("ssim: image " + std::to_string(h) + "x" + std::to_string(w) +
                         " smaller than the 11x11 window");
  }
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const auto k = gaussian_1d();
  std::vector<double> aa(ga.size());
  std::vector<double> bb(ga.size());
  std::vector<double> ab(ga.size());
  for (std::size_t i = 0; i < ga.size(); ++i) {
    aa[i] = ga[i] * ga[i];
    bb[i] = gb[i] * gb[i];
    ab[i] = ga[i] * gb[i];
  }
  const auto mu_a = filter_valid(ga, h, w, k);
  const auto mu_b = filter_valid(gb, h, w, k);
  const auto e_aa = filter_valid(aa, h, w, k);
  const auto e_bb = filter_valid(bb, h, w, k);
  const auto e_ab = filter_valid(ab, h, w, k);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace flol
