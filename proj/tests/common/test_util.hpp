// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "flol/tensor.hpp"

namespace flol::test {

inline Tensor uniform(const Shape& shape, std::uint64_t seed, float lo = -1.0F, float hi = 1.0F) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor t(shape);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(x[i]) - static_cast<double>(y[i])));
  }
  return m;
}

/// Direct-summation cross-correlation with zero padding, in double.
inline Tensor conv2d_oracle(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                            int pad) {
  const auto n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const auto co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const auto ho = (h + 2 * pad - kh) / stride + 1;
  const auto wo = (wd + 2 * pad - kw) / stride + 1;
  Tensor y({n, co, ho, wo});
  for (std::int64_t in = 0; in < n; ++in)
    for (std::int64_t o = 0; o < co; ++o)
      for (std::int64_t i = 0; i < ho; ++i)
        for (std::int64_t j = 0; j < wo; ++j) {
          double acc = b.defined() ? b.data()[static_cast<std::size_t>(o)] : 0.0;
          for (std::int64_t c = 0; c < ci; ++c)
            for (std::int64_t u = 0; u < kh; ++u)
              for (std::int64_t v = 0; v < kw; ++v) {
                const auto r = i * stride + u - pad;
                const auto s = j * stride + v - pad;
                if (r < 0 || r >= h || s < 0 || s >= wd) continue;
                acc += static_cast<double>(x.at(in, c, r, s)) * w.at(o, c, u, v);
              }
          y.at(in, o, i, j) = static_cast<float>(acc);
        }
  return y;
}

/// Orthonormal 2-D DFT of one real plane by direct summation.
inline std::vector<std::complex<double>> dft2_oracle(const std::vector<double>& plane,
                                                     std::int64_t h, std::int64_t w) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h * w));
  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (std::int64_t u = 0; u < h; ++u)
    for (std::int64_t v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (std::int64_t r = 0; r < h; ++r)
        for (std::int64_t s = 0; s < w; ++s) {
          const double ang = -2.0 * M_PI *
                             (static_cast<double>((r * u) % h) / static_cast<double>(h) +
                              static_cast<double>((s * v) % w) / static_cast<double>(w));
          acc += plane[static_cast<std::size_t>(r * w + s)] * std::polar(1.0, ang);
        }
      out[static_cast<std::size_t>(u * w + v)] = acc * norm;
    }
  return out;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("flol_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace flol::test
