// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Microbenchmarks of the kernels that dominate a forward pass. Counters
// report FLOP/s under the same convention as count_flops.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "flol/loss.hpp"
#include "flol/model.hpp"
#include "flol/ops.hpp"
#include "flol/spectral.hpp"

namespace flol {
namespace {

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0F, 1.0F);
  Tensor t(shape);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Args: channels, spatial size, stride.
void BM_Conv3x3(benchmark::State& state) {
  const auto c = state.range(0), n = state.range(1), stride = state.range(2);
  const Tensor x = random_tensor({1, c, n, n}, 1);
  const Tensor w = random_tensor({c, c, 3, 3}, 2);
  const Tensor b = random_tensor({c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b, static_cast<int>(stride), 1));
  const double out = static_cast<double>(n / stride) * static_cast<double>(n / stride);
  state.counters["FLOP/s"] = benchmark::Counter(2.0 * 9.0 * static_cast<double>(c * c) * out,
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3)->Args({16, 128, 1})->Args({16, 256, 1})->Args({16, 256, 2})->Args({64, 64, 1});

// Power-of-two sizes take the Stockham path, primes take Bluestein.
void BM_Fft2(benchmark::State& state) {
  const auto n = state.range(0);
  const Tensor x = random_tensor({1, 16, n, n}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fft2(x));
  const double pts = static_cast<double>(n * n);
  state.counters["FLOP/s"] = benchmark::Counter(16.0 * 5.0 * pts * std::log2(pts),
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Fft2)->Arg(64)->Arg(128)->Arg(127)->Arg(240);

void BM_Ifft2(benchmark::State& state) {
  const auto n = state.range(0);
  const Spectrum s = fft2(random_tensor({1, 16, n, n}, 5));
  for (auto _ : state) benchmark::DoNotOptimize(ifft2(s));
}
BENCHMARK(BM_Ifft2)->Arg(128)->Arg(240);

// Args: height, width.
void BM_Forward(benchmark::State& state) {
  const ModelConfig cfg;
  const Model model(init_weights(cfg, 0), cfg);
  const auto h = state.range(0), w = state.range(1);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.0F, 0.3F);
  Tensor x({1, 3, h, w});
  for (auto& v : x.data()) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
  state.counters["FLOP/s"] = benchmark::Counter(static_cast<double>(count_flops(cfg, h, w)),
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Forward)->Args({128, 128})->Args({256, 256})->Args({480, 640})->Unit(benchmark::kMillisecond);

// One training step's worth of forward, loss and backward at the toy recipe.
void BM_TrainStep(benchmark::State& state) {
  const ModelConfig cfg;
  WeightStore w = init_weights(cfg, 0);
  w.set_requires_grad(true);
  const Tensor x = random_tensor({static_cast<std::int64_t>(state.range(0)), 3, 64, 64}, 7);
  const Tensor gt = random_tensor(x.shape(), 8);
  for (auto _ : state) {
    GradTape tape;
    w.zero_grad();
    const auto out = forward(x, w, cfg);
    tape.backward(total_loss(out.x_hat_raw, out.x_lol_raw, gt, 0.1).total);
  }
}
BENCHMARK(BM_TrainStep)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace flol

BENCHMARK_MAIN();
