// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "flol/tensor.hpp"

namespace flol {

/// Per-channel 2-D spectrum stored as separate real and imaginary planes,
/// both (N, C, H, W).
struct Spectrum {
  Tensor real;
  Tensor imag;
};

/// Polar form of a Spectrum. Amplitude is non-negative, phase in (-pi, pi].
struct AmpPhase {
  Tensor amplitude;
  Tensor phase;
};

/// One-dimensional complex DFT of a fixed length, unnormalized.
///
/// Lengths whose prime factors are all <= kMaxDirectRadix use a self-sorting
/// mixed-radix Stockham transform; anything else goes through Bluestein's
/// chirp-z algorithm on a power-of-two grid.
class FftPlan {
public:
  static constexpr std::size_t kMaxDirectRadix = 31;

  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool uses_bluestein() const noexcept { return bluestein_ != nullptr; }

  /// In-place transform. `inverse` selects the e^{+i} kernel; no scaling.
  void execute(std::span<std::complex<double>> data, bool inverse) const;

  /// `batch` interleaved transforms in split form: element k of transform b
  /// lives at re[k * batch + b], im[k * batch + b].
  void execute_batch(double* re, double* im, std::size_t batch, bool inverse) const;

private:
  struct Bluestein;
  void stockham(double* re, double* im, std::size_t batch) const;

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<double> twiddle_re_;  // exp(-2 pi i k / n)
  std::vector<double> twiddle_im_;
  std::shared_ptr<const Bluestein> bluestein_;
};

/// Cached plan for length n; safe to call concurrently.
std::shared_ptr<const FftPlan> fft_plan(std::size_t n);

/// Orthonormal in-place 2-D transform of one row-major h x w plane.
void fft2_plane(std::span<std::complex<double>> plane, std::size_t h, std::size_t w,
                bool inverse);

/// X(u,v) = 1/sqrt(HW) sum_{h,w} x(h,w) exp(-i 2 pi (hu/H + wv/W)), per channel.
Spectrum fft2(const Tensor& x);

/// Real part of the orthonormal inverse transform.
Tensor ifft2(const Spectrum& s);

/// Largest |imag| of the inverse transform; near zero for Hermitian spectra.
double ifft2_imag_residue(const Spectrum& s);

AmpPhase decompose(const Spectrum& s);
Spectrum recompose(const AmpPhase& ap);

}  // namespace flol
