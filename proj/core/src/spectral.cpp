// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/spectral.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace flol {

using cd = std::complex<double>;

struct FftPlan::Bluestein {
  std::size_t m = 0;
  std::shared_ptr<const FftPlan> sub;
  std::vector<double> chirp_re;  // exp(-i pi k^2 / n)
  std::vector<double> chirp_im;
  std::vector<double> filter_re;  // transform of the wrapped conjugate chirp
  std::vector<double> filter_im;
};

namespace {

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> f;
  while (n % 4 == 0) {
    f.push_back(4);
    n /= 4;
  }
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

void negate(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = -v[i];
}

// Reusable per-thread scratch; grows monotonically.
std::vector<double>& scratch(int slot, std::size_t n) {
  thread_local std::array<std::vector<double>, 6> buffers;
  auto& b = buffers[static_cast<std::size_t>(slot)];
  if (b.size() < n) b.resize(n);
  return b;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw ArgumentError("FftPlan: length must be >= 1");
  factors_ = factorize(n);
  const bool direct = std::all_of(factors_.begin(), factors_.end(),
                                  [](std::size_t p) { return p <= kMaxDirectRadix; });
  if (direct) {
    twiddle_re_.resize(n);
    twiddle_im_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_re_[k] = std::cos(angle);
      twiddle_im_[k] = std::sin(angle);
    }
    return;
  }
  auto b = std::make_shared<Bluestein>();
  b->m = std::bit_ceil(2 * n - 1);
  b->sub = fft_plan(b->m);
  b->chirp_re.resize(n);
  b->chirp_im.resize(n);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % two_n;
    const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    b->chirp_re[k] = std::cos(angle);
    b->chirp_im[k] = std::sin(angle);
  }
  b->filter_re.assign(b->m, 0.0);
  b->filter_im.assign(b->m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    b->filter_re[k] = b->chirp_re[k];
    b->filter_im[k] = -b->chirp_im[k];
    if (k > 0) {
      b->filter_re[b->m - k] = b->chirp_re[k];
      b->filter_im[b->m - k] = -b->chirp_im[k];
    }
  }
  b->sub->execute_batch(b->filter_re.data(), b->filter_im.data(), 1, false);
  bluestein_ = std::move(b);
}

// Forward transform, radix by radix. Stage with radix r and span ns reads
// element j + q * n / r and writes (j / ns) * ns * r + j % ns + q * ns.
void FftPlan::stockham(double* re, double* im, std::size_t batch) const {
  const std::size_t n = n_;
  const std::size_t total = n * batch;
  auto& yr_buf = scratch(0, total);
  auto& yi_buf = scratch(1, total);
  double* xr = re;
  double* xi = im;
  double* yr = yr_buf.data();
  double* yi = yi_buf.data();
  std::size_t ns = 1;
  for (const std::size_t r : factors_) {
    const std::size_t stride = n / r;
    const std::size_t tw_step = n / (ns * r);
    for (std::size_t j = 0; j < stride; ++j) {
      const std::size_t js = j % ns;
      const std::size_t dst = (j / ns) * ns * r + js;
      std::array<double, kMaxDirectRadix> wr{};
      std::array<double, kMaxDirectRadix> wi{};
      for (std::size_t q = 0; q < r; ++q) {
        wr[q] = twiddle_re_[q * js * tw_step];
        wi[q] = twiddle_im_[q * js * tw_step];
      }
      const auto in_r = [&](std::size_t q) { return xr + (j + q * stride) * batch; };
      const auto in_i = [&](std::size_t q) { return xi + (j + q * stride) * batch; };
      const auto out_r = [&](std::size_t q) { return yr + (dst + q * ns) * batch; };
      const auto out_i = [&](std::size_t q) { return yi + (dst + q * ns) * batch; };
      switch (r) {
        case 2: {
          const double* ar = in_r(0);
          const double* ai = in_i(0);
          const double* br = in_r(1);
          const double* bi = in_i(1);
          double* o0r = out_r(0);
          double* o0i = out_i(0);
          double* o1r = out_r(1);
          double* o1i = out_i(1);
          const double w1r = wr[1];
          const double w1i = wi[1];
          for (std::size_t b = 0; b < batch; ++b) {
            const double tr = br[b] * w1r - bi[b] * w1i;
            const double ti = br[b] * w1i + bi[b] * w1r;
            o0r[b] = ar[b] + tr;
            o0i[b] = ai[b] + ti;
            o1r[b] = ar[b] - tr;
            o1i[b] = ai[b] - ti;
          }
          break;
        }
        case 3: {
          constexpr double kS = 0.86602540378443864676;  // sin(2 pi / 3)
          const double* ar = in_r(0);
          const double* ai = in_i(0);
          const double* br = in_r(1);
          const double* bi = in_i(1);
          const double* cr = in_r(2);
          const double* ci = in_i(2);
          double* o0r = out_r(0);
          double* o0i = out_i(0);
          double* o1r = out_r(1);
          double* o1i = out_i(1);
          double* o2r = out_r(2);
          double* o2i = out_i(2);
          for (std::size_t b = 0; b < batch; ++b) {
            const double t1r = br[b] * wr[1] - bi[b] * wi[1];
            const double t1i = br[b] * wi[1] + bi[b] * wr[1];
            const double t2r = cr[b] * wr[2] - ci[b] * wi[2];
            const double t2i = cr[b] * wi[2] + ci[b] * wr[2];
            const double sr = t1r + t2r;
            const double si = t1i + t2i;
            const double mr = ar[b] - 0.5 * sr;
            const double mi = ai[b] - 0.5 * si;
            // -i sin(2pi/3) (t1 - t2)
            const double dr = kS * (t1i - t2i);
            const double di = -kS * (t1r - t2r);
            o0r[b] = ar[b] + sr;
            o0i[b] = ai[b] + si;
            o1r[b] = mr + dr;
            o1i[b] = mi + di;
            o2r[b] = mr - dr;
            o2i[b] = mi - di;
          }
          break;
        }
        case 4: {
          const double* ar = in_r(0);
          const double* ai = in_i(0);
          const double* br = in_r(1);
          const double* bi = in_i(1);
          const double* cr = in_r(2);
          const double* ci = in_i(2);
          const double* dr = in_r(3);
          const double* di = in_i(3);
          double* o0r = out_r(0);
          double* o0i = out_i(0);
          double* o1r = out_r(1);
          double* o1i = out_i(1);
          double* o2r = out_r(2);
          double* o2i = out_i(2);
          double* o3r = out_r(3);
          double* o3i = out_i(3);
          for (std::size_t b = 0; b < batch; ++b) {
            const double t1r = br[b] * wr[1] - bi[b] * wi[1];
            const double t1i = br[b] * wi[1] + bi[b] * wr[1];
            const double t2r = cr[b] * wr[2] - ci[b] * wi[2];
            const double t2i = cr[b] * wi[2] + ci[b] * wr[2];
            const double t3r = dr[b] * wr[3] - di[b] * wi[3];
            const double t3i = dr[b] * wi[3] + di[b] * wr[3];
            const double pr = ar[b] + t2r;
            const double pi = ai[b] + t2i;
            const double qr = ar[b] - t2r;
            const double qi = ai[b] - t2i;
            const double sr = t1r + t3r;
            const double si = t1i + t3i;
            // -i (t1 - t3)
            const double ur = t1i - t3i;
            const double ui = t3r - t1r;
            o0r[b] = pr + sr;
            o0i[b] = pi + si;
            o1r[b] = qr + ur;
            o1i[b] = qi + ui;
            o2r[b] = pr - sr;
            o2i[b] = pi - si;
            o3r[b] = qr - ur;
            o3i[b] = qi - ui;
          }
          break;
        }
        case 5: {
          constexpr double kC1 = 0.30901699437494742410;   // cos(2 pi / 5)
          constexpr double kC2 = -0.80901699437494742410;  // cos(4 pi / 5)
          constexpr double kS1 = 0.95105651629515357212;   // sin(2 pi / 5)
          constexpr double kS2 = 0.58778525229247312917;   // sin(4 pi / 5)
          const double* x0r = in_r(0);
          const double* x0i = in_i(0);
          const double* x1r = in_r(1);
          const double* x1i = in_i(1);
          const double* x2r = in_r(2);
          const double* x2i = in_i(2);
          const double* x3r = in_r(3);
          const double* x3i = in_i(3);
          const double* x4r = in_r(4);
          const double* x4i = in_i(4);
          double* o0r = out_r(0);
          double* o0i = out_i(0);
          double* o1r = out_r(1);
          double* o1i = out_i(1);
          double* o2r = out_r(2);
          double* o2i = out_i(2);
          double* o3r = out_r(3);
          double* o3i = out_i(3);
          double* o4r = out_r(4);
          double* o4i = out_i(4);
          for (std::size_t b = 0; b < batch; ++b) {
            const double t1r = x1r[b] * wr[1] - x1i[b] * wi[1];
            const double t1i = x1r[b] * wi[1] + x1i[b] * wr[1];
            const double t2r = x2r[b] * wr[2] - x2i[b] * wi[2];
            const double t2i = x2r[b] * wi[2] + x2i[b] * wr[2];
            const double t3r = x3r[b] * wr[3] - x3i[b] * wi[3];
            const double t3i = x3r[b] * wi[3] + x3i[b] * wr[3];
            const double t4r = x4r[b] * wr[4] - x4i[b] * wi[4];
            const double t4i = x4r[b] * wi[4] + x4i[b] * wr[4];
            const double s1r = t1r + t4r;
            const double s1i = t1i + t4i;
            const double s2r = t2r + t3r;
            const double s2i = t2i + t3i;
            const double d1r = t1r - t4r;
            const double d1i = t1i - t4i;
            const double d2r = t2r - t3r;
            const double d2i = t2i - t3i;
            const double a1r = x0r[b] + kC1 * s1r + kC2 * s2r;
            const double a1i = x0i[b] + kC1 * s1i + kC2 * s2i;
            const double a2r = x0r[b] + kC2 * s1r + kC1 * s2r;
            const double a2i = x0i[b] + kC2 * s1i + kC1 * s2i;
            // -i (S1 d1 + S2 d2) and -i (S2 d1 - S1 d2)
            const double b1r = kS1 * d1i + kS2 * d2i;
            const double b1i = -(kS1 * d1r + kS2 * d2r);
            const double b2r = kS2 * d1i - kS1 * d2i;
            const double b2i = -(kS2 * d1r - kS1 * d2r);
            o0r[b] = x0r[b] + s1r + s2r;
            o0i[b] = x0i[b] + s1i + s2i;
            o1r[b] = a1r + b1r;
            o1i[b] = a1i + b1i;
            o4r[b] = a1r - b1r;
            o4i[b] = a1i - b1i;
            o2r[b] = a2r + b2r;
            o2i[b] = a2i + b2i;
            o3r[b] = a2r - b2r;
            o3i[b] = a2i - b2i;
          }
          break;
        }
        default: {
          auto& tr_buf = scratch(2, r * batch);
          auto& ti_buf = scratch(3, r * batch);
          double* tr = tr_buf.data();
          double* ti = ti_buf.data();
          for (std::size_t q = 0; q < r; ++q) {
            const double* ar = in_r(q);
            const double* ai = in_i(q);
            for (std::size_t b = 0; b < batch; ++b) {
              tr[q * batch + b] = ar[b] * wr[q] - ai[b] * wi[q];
              ti[q * batch + b] = ar[b] * wi[q] + ai[b] * wr[q];
            }
          }
          const std::size_t root = n / r;  // twiddle index step of the r-th roots of unity
          for (std::size_t k = 0; k < r; ++k) {
            double* pr = out_r(k);
            double* pi = out_i(k);
            for (std::size_t b = 0; b < batch; ++b) {
              pr[b] = tr[b];
              pi[b] = ti[b];
            }
            for (std::size_t q = 1; q < r; ++q) {
              const std::size_t t = ((q * k) % r) * root;
              const double cr = twiddle_re_[t];
              const double ci = twiddle_im_[t];
              const double* sr = tr + q * batch;
              const double* si = ti + q * batch;
              for (std::size_t b = 0; b < batch; ++b) {
                pr[b] += sr[b] * cr - si[b] * ci;
                pi[b] += sr[b] * ci + si[b] * cr;
              }
            }
          }
          break;
        }
      }
    }
    std::swap(xr, yr);
    std::swap(xi, yi);
    ns *= r;
  }
  if (xr != re) {
    std::copy(xr, xr + total, re);
    std::copy(xi, xi + total, im);
  }
}

void FftPlan::execute_batch(double* re, double* im, std::size_t batch, bool inverse) const {
  if (n_ == 1 || batch == 0) return;
  const std::size_t total = n_ * batch;
  // inverse(x) = conj(forward(conj(x)))
  if (inverse) negate(im, total);
  if (bluestein_) {
    const auto& b = *bluestein_;
    std::vector<double> wr(b.m * batch, 0.0);
    std::vector<double> wi(b.m * batch, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      const double cr = b.chirp_re[k];
      const double ci = b.chirp_im[k];
      for (std::size_t j = 0; j < batch; ++j) {
        const double xr = re[k * batch + j];
        const double xi = im[k * batch + j];
        wr[k * batch + j] = xr * cr - xi * ci;
        wi[k * batch + j] = xr * ci + xi * cr;
      }
    }
    b.sub->execute_batch(wr.data(), wi.data(), batch, false);
    for (std::size_t k = 0; k < b.m; ++k) {
      const double fr = b.filter_re[k];
      const double fi = b.filter_im[k];
      for (std::size_t j = 0; j < batch; ++j) {
        const double xr = wr[k * batch + j];
        const double xi = wi[k * batch + j];
        wr[k * batch + j] = xr * fr - xi * fi;
        wi[k * batch + j] = xr * fi + xi * fr;
      }
    }
    b.sub->execute_batch(wr.data(), wi.data(), batch, true);
    const double inv_m = 1.0 / static_cast<double>(b.m);
    for (std::size_t k = 0; k < n_; ++k) {
      const double cr = b.chirp_re[k] * inv_m;
      const double ci = b.chirp_im[k] * inv_m;
      for (std::size_t j = 0; j < batch; ++j) {
        const double xr = wr[k * batch + j];
        const double xi = wi[k * batch + j];
        re[k * batch + j] = xr * cr - xi * ci;
        im[k * batch + j] = xr * ci + xi * cr;
      }
    }
  } else {
    stockham(re, im, batch);
  }
  if (inverse) negate(im, total);
}

void FftPlan::execute(std::span<cd> data, bool inverse) const {
  if (data.size() != n_) throw DimensionError("FftPlan: buffer length does not match plan");
  std::vector<double> re(n_);
  std::vector<double> im(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    re[k] = data[k].real();
    im[k] = data[k].imag();
  }
  execute_batch(re.data(), im.data(), 1, inverse);
  for (std::size_t k = 0; k < n_; ++k) data[k] = {re[k], im[k]};
}

std::shared_ptr<const FftPlan> fft_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  // Built outside the lock: Bluestein plans request their own sub-plan.
  auto plan = std::make_shared<const FftPlan>(n);
  std::lock_guard lock(mu);
  return cache.emplace(n, std::move(plan)).first->second;
}

namespace {

void transpose(const double* src, double* dst, std::size_t rows, std::size_t cols) {
  constexpr std::size_t kTile = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kTile) {
    for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
      const std::size_t r1 = std::min(rows, r0 + kTile);
      const std::size_t c1 = std::min(cols, c0 + kTile);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
      }
    }
  }
}

// Unnormalized 2-D transform of a row-major h x w split-complex plane. The
// result is left transposed in (tr, ti): Z(u, v) sits at v * h + u.
void fft2_transposed(double* re, double* im, double* tr, double* ti, std::size_t h,
                     std::size_t w, bool inverse) {
  // Columns: element k of column b sits at k * w + b.
  fft_plan(h)->execute_batch(re, im, w, inverse);
  transpose(re, tr, h, w);
  transpose(im, ti, h, w);
  fft_plan(w)->execute_batch(tr, ti, h, inverse);
}

// Orthonormal 2-D transform of one row-major split-complex plane.
void fft2_split(double* re, double* im, std::size_t h, std::size_t w, bool inverse) {
  const std::size_t n = h * w;
  auto& tr = scratch(4, n);
  auto& ti = scratch(5, n);
  fft2_transposed(re, im, tr.data(), ti.data(), h, w, inverse);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  transpose(tr.data(), re, w, h);
  transpose(ti.data(), im, w, h);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] *= norm;
    im[i] *= norm;
  }
}

}  // namespace

void fft2_plane(std::span<cd> plane, std::size_t h, std::size_t w, bool inverse) {
  if (plane.size() != h * w) throw DimensionError("fft2_plane: buffer size mismatch");
  std::vector<double> re(h * w);
  std::vector<double> im(h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    re[i] = plane[i].real();
    im[i] = plane[i].imag();
  }
  fft2_split(re.data(), im.data(), h, w, inverse);
  for (std::size_t i = 0; i < h * w; ++i) plane[i] = {re[i], im[i]};
}

namespace {

void require_image(const Tensor& t, const char* op) {
  if (!t.defined() || t.rank() != 4 || t.dim(2) < 1 || t.dim(3) < 1) {
    throw DimensionError(std::string(op) + ": expected a non-empty (N,C,H,W) tensor");
  }
}

std::uint64_t transform_flops(const Shape& s) {
  const double hw = static_cast<double>(s[2] * s[3]);
  const double per_plane = hw > 1.0 ? 5.0 * hw * std::log2(hw) : 0.0;
  return static_cast<std::uint64_t>(s[0] * s[1]) *
         static_cast<std::uint64_t>(std::llround(per_plane));
}

std::size_t mirror(std::size_t i, std::size_t n) { return i == 0 ? 0 : n - i; }

// Forward transform of real planes into (re, im) float planes, two planes per
// complex transform: Z = F(a + i b), A = (Z + conj Z~) / 2, B = (Z - conj Z~) / 2i
// with Z~(u, v) = Z(-u, -v).
void forward_real(const float* x, const Shape& s, float* re, float* im) {
  const auto h = static_cast<std::size_t>(s[2]);
  const auto w = static_cast<std::size_t>(s[3]);
  const std::size_t hw = h * w;
  const auto planes = static_cast<std::size_t>(s[0] * s[1]);
  const double half = 0.5 / std::sqrt(static_cast<double>(hw));
  std::vector<double> zr(hw);
  std::vector<double> zi(hw);
  auto& tr_buf = scratch(4, hw);
  auto& ti_buf = scratch(5, hw);
  const double* tr = tr_buf.data();
  const double* ti = ti_buf.data();
  for (std::size_t p = 0; p < planes; p += 2) {
    const bool pair = p + 1 < planes;
    const float* a = x + p * hw;
    const float* b = pair ? x + (p + 1) * hw : nullptr;
    for (std::size_t i = 0; i < hw; ++i) {
      zr[i] = a[i];
      zi[i] = pair ? b[i] : 0.0;
    }
    fft2_transposed(zr.data(), zi.data(), tr_buf.data(), ti_buf.data(), h, w, false);
    float* ar = re + p * hw;
    float* ai = im + p * hw;
    float* br = pair ? re + (p + 1) * hw : nullptr;
    float* bi = pair ? im + (p + 1) * hw : nullptr;
    for (std::size_t u = 0; u < h; ++u) {
      const std::size_t mu = mirror(u, h);
      for (std::size_t v = 0; v < w; ++v) {
        const std::size_t k = u * w + v;
        const std::size_t t = v * h + u;
        const std::size_t m = mirror(v, w) * h + mu;
        if (!pair) {
          ar[k] = static_cast<float>(2.0 * half * tr[t]);
          ai[k] = static_cast<float>(2.0 * half * ti[t]);
          continue;
        }
        ar[k] = static_cast<float>(half * (tr[t] + tr[m]));
        ai[k] = static_cast<float>(half * (ti[t] - ti[m]));
        br[k] = static_cast<float>(half * (ti[t] + ti[m]));
        bi[k] = static_cast<float>(-half * (tr[t] - tr[m]));
      }
    }
  }
}

// Real part of the inverse transform. Re F^-1(S) = F^-1(Herm S) with
// Herm S = (S + conj S~) / 2, so two Hermitian parts share one transform.
void inverse_real(const float* re, const float* im, const Shape& s, float* out) {
  const auto h = static_cast<std::size_t>(s[2]);
  const auto w = static_cast<std::size_t>(s[3]);
  const std::size_t hw = h * w;
  const auto planes = static_cast<std::size_t>(s[0] * s[1]);
  const double norm = 1.0 / std::sqrt(static_cast<double>(hw));
  auto& tr_buf = scratch(4, hw);
  auto& ti_buf = scratch(5, hw);
  std::vector<double> zr(hw);
  std::vector<double> zi(hw);
  for (std::size_t p = 0; p < planes; p += 2) {
    const bool pair = p + 1 < planes;
    const float* sr = re + p * hw;
    const float* si = im + p * hw;
    const float* tr = pair ? re + (p + 1) * hw : nullptr;
    const float* ti = pair ? im + (p + 1) * hw : nullptr;
    for (std::size_t u = 0; u < h; ++u) {
      const std::size_t mu = mirror(u, h);
      for (std::size_t v = 0; v < w; ++v) {
        const std::size_t k = u * w + v;
        const std::size_t m = mu * w + mirror(v, w);
        const double har = 0.5 * (static_cast<double>(sr[k]) + sr[m]);
        const double hai = 0.5 * (static_cast<double>(si[k]) - si[m]);
        double hbr = 0.0;
        double hbi = 0.0;
        if (pair) {
          hbr = 0.5 * (static_cast<double>(tr[k]) + tr[m]);
          hbi = 0.5 * (static_cast<double>(ti[k]) - ti[m]);
        }
        zr[k] = har - hbi;
        zi[k] = hai + hbr;
      }
    }
    fft2_transposed(zr.data(), zi.data(), tr_buf.data(), ti_buf.data(), h, w, true);
    float* a = out + p * hw;
    float* b = pair ? out + (p + 1) * hw : nullptr;
    for (std::size_t u = 0; u < h; ++u) {
      for (std::size_t v = 0; v < w; ++v) {
        a[u * w + v] = static_cast<float>(norm * tr_buf[v * h + u]);
        if (pair) b[u * w + v] = static_cast<float>(norm * ti_buf[v * h + u]);
      }
    }
  }
}

// Largest |imag| of the full complex inverse transform.
double inverse_imag_residue(const float* re, const float* im, const Shape& s) {
  const auto h = static_cast<std::size_t>(s[2]);
  const auto w = static_cast<std::size_t>(s[3]);
  const std::size_t hw = h * w;
  std::vector<double> zr(hw);
  std::vector<double> zi(hw);
  double residue = 0.0;
  for (std::int64_t p = 0; p < s[0] * s[1]; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * hw;
    for (std::size_t i = 0; i < hw; ++i) {
      zr[i] = re[off + i];
      zi[i] = im[off + i];
    }
    fft2_split(zr.data(), zi.data(), h, w, true);
    for (std::size_t i = 0; i < hw; ++i) residue = std::max(residue, std::abs(zi[i]));
  }
  return residue;
}

void require_spectrum(const Spectrum& s, const char* op) {
  require_image(s.real, op);
  if (!s.imag.defined() || s.real.shape() != s.imag.shape()) {
    throw DimensionError(std::string(op) + ": real and imaginary planes differ in shape");
  }
}

}  // namespace

Spectrum fft2(const Tensor& x) {
  require_image(x, "fft2");
  Spectrum s{Tensor(x.shape()), Tensor(x.shape())};
  forward_real(x.ptr(), x.shape(), s.real.ptr(), s.imag.ptr());
  add_flops(transform_flops(x.shape()));
  check_finite(s.real, "fft2");
  check_finite(s.imag, "fft2");
  if (should_record({&x})) {
    GradTape::active()->record("fft2", {x}, {s.real, s.imag}, [x, s]() mutable {
      const auto n = static_cast<std::size_t>(x.numel());
      std::vector<float> zeros;
      const float* gre = s.real.has_grad() ? s.real.grad().data() : nullptr;
      const float* gim = s.imag.has_grad() ? s.imag.grad().data() : nullptr;
      if (!gre || !gim) zeros.assign(n, 0.0F);
      std::vector<float> back(n);
      inverse_real(gre ? gre : zeros.data(), gim ? gim : zeros.data(), x.shape(), back.data());
      auto gx = x.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) gx[i] += back[i];
    });
  }
  return s;
}

Tensor ifft2(const Spectrum& s) {
  require_spectrum(s, "ifft2");
  Tensor out(s.real.shape());
  inverse_real(s.real.ptr(), s.imag.ptr(), s.real.shape(), out.ptr());
  add_flops(transform_flops(s.real.shape()));
  check_finite(out, "ifft2");
  if (should_record({&s.real, &s.imag})) {
    GradTape::active()->record("ifft2", {s.real, s.imag}, {out}, [s, out]() mutable {
      const auto n = static_cast<std::size_t>(out.numel());
      std::vector<float> gre(n);
      std::vector<float> gim(n);
      forward_real(out.grad().data(), out.shape(), gre.data(), gim.data());
      if (s.real.requires_grad()) {
        auto g = s.real.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += gre[i];
      }
      if (s.imag.requires_grad()) {
        auto g = s.imag.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += gim[i];
      }
    });
  }
  return out;
}

double ifft2_imag_residue(const Spectrum& s) {
  require_spectrum(s, "ifft2_imag_residue");
  return inverse_imag_residue(s.real.ptr(), s.imag.ptr(), s.real.shape());
}

AmpPhase decompose(const Spectrum& s) {
  require_spectrum(s, "decompose");
  AmpPhase ap{Tensor(s.real.shape()), Tensor(s.real.shape())};
  const auto re = s.real.data();
  const auto im = s.imag.data();
  auto amp = ap.amplitude.data();
  auto ph = ap.phase.data();
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double r = re[i];
    const double m = im[i];
    amp[i] = static_cast<float>(std::hypot(r, m));
    double angle = (r == 0.0 && m == 0.0) ? 0.0 : std::atan2(m, r);
    if (angle <= -std::numbers::pi) angle = std::numbers::pi;
    ph[i] = static_cast<float>(angle);
  }
  add_flops(static_cast<std::uint64_t>(s.real.numel()));
  if (should_record({&s.real, &s.imag})) {
    GradTape::active()->record(
        "decompose", {s.real, s.imag}, {ap.amplitude, ap.phase}, [s, ap]() mutable {
          const auto re = s.real.data();
          const auto im = s.imag.data();
          const auto n = re.size();
          const float* ga = ap.amplitude.has_grad() ? ap.amplitude.grad().data() : nullptr;
          const float* gp = ap.phase.has_grad() ? ap.phase.grad().data() : nullptr;
          std::span<float> gre;
          std::span<float> gim;
          if (s.real.requires_grad()) gre = s.real.ensure_grad();
          if (s.imag.requires_grad()) gim = s.imag.ensure_grad();
          for (std::size_t i = 0; i < n; ++i) {
            const double r = re[i];
            const double m = im[i];
            const double a2 = r * r + m * m;
            if (a2 == 0.0) continue;  // no defined direction at the origin
            const double a = std::sqrt(a2);
            double dr = 0.0;
            double dm = 0.0;
            if (ga) {
              dr += ga[i] * r / a;
              dm += ga[i] * m / a;
            }
            if (gp) {
              dr -= gp[i] * m / a2;
              dm += gp[i] * r / a2;
            }
            if (!gre.empty()) gre[i] += static_cast<float>(dr);
            if (!gim.empty()) gim[i] += static_cast<float>(dm);
          }
        });
  }
  return ap;
}

Spectrum recompose(const AmpPhase& ap) {
  require_image(ap.amplitude, "recompose");
  if (!ap.phase.defined() || ap.phase.shape() != ap.amplitude.shape()) {
    throw DimensionError("recompose: amplitude and phase differ in shape");
  }
  const auto amp = ap.amplitude.data();
  const auto ph = ap.phase.data();
  for (float a : amp) {
    if (a < 0.0F) throw ArgumentError("recompose: negative amplitude");
  }
  Spectrum s{Tensor(ap.amplitude.shape()), Tensor(ap.amplitude.shape())};
  auto re = s.real.data();
  auto im = s.imag.data();
  for (std::size_t i = 0; i < amp.size(); ++i) {
    const double a = amp[i];
    const double p = ph[i];
    re[i] = static_cast<float>(a * std::cos(p));
    im[i] = static_cast<float>(a * std::sin(p));
  }
  add_flops(static_cast<std::uint64_t>(ap.amplitude.numel()));
  check_finite(s.real, "recompose");
  check_finite(s.imag, "recompose");
  if (should_record({&ap.amplitude, &ap.phase})) {
    GradTape::active()->record(
        "recompose", {ap.amplitude, ap.phase}, {s.real, s.imag}, [ap, s]() mutable {
          const auto amp = ap.amplitude.data();
          const auto ph = ap.phase.data();
          const float* gre = s.real.has_grad() ? s.real.grad().data() : nullptr;
          const float* gim = s.imag.has_grad() ? s.imag.grad().data() : nullptr;
          std::span<float> ga;
          std::span<float> gp;
          if (ap.amplitude.requires_grad()) ga = ap.amplitude.ensure_grad();
          if (ap.phase.requires_grad()) gp = ap.phase.ensure_grad();
          for (std::size_t i = 0; i < amp.size(); ++i) {
            const double c = std::cos(static_cast<double>(ph[i]));
            const double sn = std::sin(static_cast<double>(ph[i]));
            const double r = gre ? gre[i] : 0.0;
            const double m = gim ? gim[i] : 0.0;
            if (!ga.empty()) ga[i] += static_cast<float>(r * c + m * sn);
            if (!gp.empty()) gp[i] += static_cast<float>(amp[i] * (m * c - r * sn));
          }
        });
  }
  return s;
}

}  // namespace flol
