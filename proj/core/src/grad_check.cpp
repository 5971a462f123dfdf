// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "flol/ops.hpp"

namespace flol {
namespace {

double loss_of(const std::function<Tensor()>& forward) {
  const Tensor out = forward();
  double acc = 0.0;
  for (float v : out.data()) acc += v;
  return acc;
}

template <typename Central>
double extrapolate(const Central& central, const GradCheckOptions& options) {
  if (!options.richardson) return central(options.step);
  const double h = options.step;
  return (64.0 * central(h) - 20.0 * central(2.0 * h) + central(4.0 * h)) / 45.0;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& forward,
                           const std::vector<NamedTensor>& params,
                           const GradCheckOptions& options) {
  std::vector<Tensor> tensors;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.set_requires_grad(true);
    if (t.has_grad()) t.zero_grad();
    tensors.push_back(t);
  }
  {
    GradTape tape;
    const Tensor loss = sum(forward());
    tape.backward(loss);
  }

  std::mt19937_64 rng(options.probe_seed);
  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor t = tensors[pi];
    const auto& name = params[pi].name;
    const auto n = static_cast<std::size_t>(t.numel());
    std::vector<float> analytic(n, 0.0F);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    for (float g : analytic) {
      if (!std::isfinite(g)) throw GradCheckFailure("non-finite analytic gradient for '" + name + "'");
    }

    auto values = t.data();
    double rel = 0.0;
    if (options.directional) {
      std::uniform_real_distribution<float> mag(0.5F, 1.0F);
      std::bernoulli_distribution coin(0.5);
      std::vector<float> base(values.begin(), values.end());
      std::vector<float> v(n);
      for (std::size_t d = 0; d < options.directions; ++d) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const bool neg = analytic[i] != 0.0F ? analytic[i] < 0.0F : coin(rng);
          v[i] = neg ? -mag(rng) : mag(rng);
          norm += static_cast<double>(v[i]) * v[i];
        }
        // Unit length, so the step moves the parameter by `step` in L2.
        double a = 0.0;
        const double inv = 1.0 / std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = static_cast<float>(v[i] * inv);
          a += static_cast<double>(analytic[i]) * v[i];
        }
        const auto shifted = [&](double h) {
          for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<float>(base[i] + h * v[i]);
          return loss_of(forward);
        };
        const auto central = [&](double h) { return (shifted(h) - shifted(-h)) / (2.0 * h); };
        const double numeric = extrapolate(central, options);
        std::copy(base.begin(), base.end(), values.begin());
        if (!std::isfinite(numeric)) {
          throw GradCheckFailure("non-finite numeric gradient for '" + name + "'");
        }
        rel = std::max(rel, std::fabs(numeric - a) /
                                std::max({std::fabs(numeric), std::fabs(a), 1e-8}));
      }
    } else {
      std::vector<std::size_t> probes(n);
      std::iota(probes.begin(), probes.end(), std::size_t{0});
      if (options.max_probes != 0 && options.max_probes < n) {
        std::shuffle(probes.begin(), probes.end(), rng);
        probes.resize(options.max_probes);
      }
      // Normalized by the whole parameter's analytic gradient, probed or not.
      double max_abs_diff = 0.0;
      double scale = 1e-8;
      for (float g : analytic) scale = std::max(scale, static_cast<double>(std::fabs(g)));
      for (std::size_t idx : probes) {
        const float original = values[idx];
        const auto central = [&](double h) {
          const float plus = static_cast<float>(original + h);
          const float minus = static_cast<float>(original - h);
          values[idx] = plus;
          const double f_plus = loss_of(forward);
          values[idx] = minus;
          const double f_minus = loss_of(forward);
          values[idx] = original;
          return (f_plus - f_minus) / (static_cast<double>(plus) - minus);
        };
        const double numeric = extrapolate(central, options);
        if (!std::isfinite(numeric)) {
          throw GradCheckFailure("non-finite numeric gradient for '" + name + "'");
        }
        max_abs_diff = std::max(max_abs_diff, std::fabs(numeric - analytic[idx]));
        scale = std::max(scale, std::fabs(numeric));
      }
      rel = max_abs_diff / scale;
    }
    if (result.worst_parameter.empty() || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = name;
    }
  }
  return result;
}

double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                  const std::vector<Shape>& input_shapes, double tolerance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0F, 1.0F);
  std::vector<Tensor> inputs;
  std::vector<NamedTensor> named;
  for (std::size_t i = 0; i < input_shapes.size(); ++i) {
    Tensor t(input_shapes[i]);
    for (auto& v : t.data()) v = dist(rng);
    inputs.push_back(t);
    named.push_back({"input" + std::to_string(i), t});
  }
  const auto result = grad_check([&] { return op(inputs); }, named);
  if (!(result.max_relative_error < tolerance)) {
    throw GradCheckFailure("gradient mismatch for '" + result.worst_parameter +
                           "': relative error " + std::to_string(result.max_relative_error));
  }
  return result.max_relative_error;
}

}  // namespace flol
