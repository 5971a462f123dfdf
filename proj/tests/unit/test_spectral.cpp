// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "flol/ops.hpp"
#include "flol/spectral.hpp"
#include "test_util.hpp"

namespace flol {
namespace {

using test::max_abs_diff;
using test::uniform;

std::vector<double> plane_of(const Tensor& x, std::int64_t n, std::int64_t c) {
  const auto h = x.dim(2), w = x.dim(3);
  std::vector<double> p(static_cast<std::size_t>(h * w));
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) p[static_cast<std::size_t>(i * w + j)] = x.at(n, c, i, j);
  return p;
}

double sum_sq(const Tensor& t) {
  double s = 0.0;
  for (float v : t.data()) s += static_cast<double>(v) * v;
  return s;
}

class SquareSizes : public ::testing::TestWithParam<int> {};

TEST_P(SquareSizes, MatchesDirectDft) {
  const int n = GetParam();
  const Tensor x = uniform({2, 2, n, n}, static_cast<std::uint64_t>(n));
  const Spectrum s = fft2(x);
  double err = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c) {
      const auto ref = test::dft2_oracle(plane_of(x, b, c), n, n);
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
          const auto& z = ref[static_cast<std::size_t>(u * n + v)];
          err = std::max(err, std::abs(s.real.at(b, c, u, v) - z.real()));
          err = std::max(err, std::abs(s.imag.at(b, c, u, v) - z.imag()));
        }
    }
  EXPECT_LT(err, 1e-4);
}

TEST_P(SquareSizes, ParsevalRoundtripHermitian) {
  const int n = GetParam();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor x = uniform({1, 3, n, n}, seed * 31 + static_cast<std::uint64_t>(n));
    const Spectrum s = fft2(x);
    const double ex = sum_sq(x), es = sum_sq(s.real) + sum_sq(s.imag);
    EXPECT_LT(std::abs(ex - es) / ex, 1e-4);
    EXPECT_LT(max_abs_diff(ifft2(s), x), 1e-5);
    EXPECT_LT(ifft2_imag_residue(s), 1e-4);
    for (int c = 0; c < 3; ++c)
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
          const int mu = (n - u) % n, mv = (n - v) % n;
          EXPECT_NEAR(s.real.at(0, c, u, v), s.real.at(0, c, mu, mv), 1e-5);
          EXPECT_NEAR(s.imag.at(0, c, u, v), -s.imag.at(0, c, mu, mv), 1e-5);
        }
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, SquareSizes, ::testing::Values(4, 6, 8, 15, 16, 17, 32));

TEST(Fft2, RectangularAndPrimeSizesMatchOracle) {
  for (auto [h, w] : {std::pair{5, 7}, {3, 37}, {74, 12}, {1, 9}, {2, 1}, {1, 1}, {12, 10}}) {
    const Tensor x = uniform({1, 1, h, w}, static_cast<std::uint64_t>(h * 100 + w));
    const Spectrum s = fft2(x);
    const auto ref = test::dft2_oracle(plane_of(x, 0, 0), h, w);
    double err = 0.0;
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v) {
        const auto& z = ref[static_cast<std::size_t>(u * w + v)];
        err = std::max({err, std::abs(s.real.at(0, 0, u, v) - z.real()),
                        std::abs(s.imag.at(0, 0, u, v) - z.imag())});
      }
    EXPECT_LT(err, 1e-4) << h << "x" << w;
    EXPECT_LT(max_abs_diff(ifft2(s), x), 1e-5) << h << "x" << w;
  }
}

TEST(Fft2, DcOnlyAndImpulse) {
  const Tensor c = Tensor::full({1, 1, 6, 10}, 0.3F);
  const Spectrum s = fft2(c);
  EXPECT_NEAR(s.real.at(0, 0, 0, 0), 0.3 * std::sqrt(60.0), 1e-5);
  for (std::size_t i = 1; i < s.real.data().size(); ++i) {
    EXPECT_NEAR(s.real.data()[i], 0.0, 1e-5);
    EXPECT_NEAR(s.imag.data()[i], 0.0, 1e-5);
  }
  Tensor imp({1, 1, 6, 10});
  imp.at(0, 0, 0, 0) = 1.0F;
  const Spectrum f = fft2(imp);
  for (std::size_t i = 0; i < f.real.data().size(); ++i) {
    EXPECT_NEAR(f.real.data()[i], 1.0 / std::sqrt(60.0), 1e-6);
    EXPECT_NEAR(f.imag.data()[i], 0.0, 1e-6);
  }
}

TEST(Ifft2, DcSpectrumAndZero) {
  Spectrum s{Tensor({1, 1, 4, 6}), Tensor({1, 1, 4, 6})};
  s.real.at(0, 0, 0, 0) = static_cast<float>(std::sqrt(24.0));
  const Tensor out = ifft2(s);
  for (float v : out.data()) EXPECT_NEAR(v, 1.0, 1e-6);
  const Spectrum z{Tensor({1, 2, 5, 5}), Tensor({1, 2, 5, 5})};
  const Tensor zero = ifft2(z);
  for (float v : zero.data()) EXPECT_EQ(v, 0.0F);
}

TEST(Ifft2, ReportsImaginaryResidueOfNonHermitianSpectrum) {
  Spectrum s{Tensor({1, 1, 4, 4}), Tensor({1, 1, 4, 4})};
  s.imag.at(0, 0, 0, 0) = 4.0F;  // inverse is the constant 1i
  EXPECT_NEAR(ifft2_imag_residue(s), 1.0, 1e-6);
}

TEST(Decompose, TriangleAndOriginConventions) {
  const Spectrum s{Tensor({1, 1, 1, 2}, {3.0F, 0.0F}), Tensor({1, 1, 1, 2}, {4.0F, 0.0F})};
  const AmpPhase ap = decompose(s);
  EXPECT_FLOAT_EQ(ap.amplitude.data()[0], 5.0F);
  EXPECT_NEAR(ap.phase.data()[0], 0.9273, 1e-4);
  EXPECT_EQ(ap.amplitude.data()[1], 0.0F);
  EXPECT_EQ(ap.phase.data()[1], 0.0F);
}

TEST(Recompose, PolarToCartesianAndRejectsNegativeAmplitude) {
  const AmpPhase ap{Tensor({1, 1, 1, 2}, {1.0F, 2.0F}),
                    Tensor({1, 1, 1, 2}, {0.0F, static_cast<float>(M_PI / 2)})};
  const Spectrum s = recompose(ap);
  EXPECT_FLOAT_EQ(s.real.data()[0], 1.0F);
  EXPECT_FLOAT_EQ(s.imag.data()[0], 0.0F);
  EXPECT_NEAR(s.real.data()[1], 0.0, 1e-6);
  EXPECT_FLOAT_EQ(s.imag.data()[1], 2.0F);
  const AmpPhase bad{Tensor({1, 1, 1, 1}, {-1.0F}), Tensor({1, 1, 1, 1})};
  EXPECT_THROW(recompose(bad), ArgumentError);
}

TEST(Decompose, RoundtripAndAmplitudeLinearity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Spectrum s{uniform({1, 2, 5, 6}, seed), uniform({1, 2, 5, 6}, seed + 100)};
    const AmpPhase ap = decompose(s);
    for (float a : ap.amplitude.data()) EXPECT_GE(a, 0.0F);
    for (float p : ap.phase.data()) {
      EXPECT_GT(p, -M_PI - 1e-6);
      EXPECT_LE(p, M_PI + 1e-6);
    }
    const Spectrum r = recompose(ap);
    EXPECT_LT(max_abs_diff(r.real, s.real), 1e-5);
    EXPECT_LT(max_abs_diff(r.imag, s.imag), 1e-5);
  }
  const Tensor x = uniform({1, 3, 9, 8}, 5, 0.0F, 1.0F);
  AmpPhase ap = decompose(fft2(x));
  ap.amplitude = scale(ap.amplitude, 2.0F);
  EXPECT_LT(max_abs_diff(ifft2(recompose(ap)), scale(x, 2.0F)), 1e-5);
}

TEST(Fft2, GradientOfRoundtripIsOnes) {
  GradTape tape;
  Tensor x = uniform({1, 2, 6, 7}, 3);
  x.set_requires_grad(true);
  tape.backward(sum(ifft2(fft2(x))));
  for (float g : x.grad()) EXPECT_NEAR(g, 1.0, 1e-4);
}

TEST(FftPlan, OneDimensionalAgainstDft) {
  for (std::size_t n : {1U, 2U, 3U, 5U, 7U, 12U, 29U, 31U, 37U, 64U, 97U, 100U, 127U, 210U}) {
    const auto plan = fft_plan(n);
    EXPECT_EQ(plan->uses_bluestein(), n == 37 || n == 97 || n == 127);
    std::vector<std::complex<double>> x(n), ref(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {std::sin(1.3 * i + 0.2), std::cos(0.7 * i * i)};
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        ref[k] += x[i] * std::polar(1.0, -2.0 * M_PI * static_cast<double>((i * k) % n) / n);
    for (bool inverse : {false, true}) {
      auto y = x;
      plan->execute(y, inverse);
      double err = 0.0;
      // The inverse kernel at k equals the forward kernel at n - k.
      for (std::size_t k = 0; k < n; ++k) {
        err = std::max(err, std::abs(y[k] - (inverse ? ref[(n - k) % n] : ref[k])));
      }
      EXPECT_LT(err, 1e-9 * static_cast<double>(n)) << "n=" << n << " inverse=" << inverse;
    }
  }
}

}  // namespace
}  // namespace flol
