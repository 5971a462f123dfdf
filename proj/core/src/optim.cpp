// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/optim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace flol {

void OptimizerConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("betas must lie in [0, 1)");
  }
  if (!(lr_min > 0.0 && lr_min <= lr_max)) throw ConfigError("need 0 < lr_min <= lr_max");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (crop < 16) throw ConfigError("crop must be >= 16");
  if (!(lambda_perceptual >= 0.0)) throw ConfigError("lambda_perceptual must be >= 0");
  if (validation_every < 1) throw ConfigError("validation_every must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
}

OptimizerConfig optimizer_config_from(const KeyValueFile& kv) {
  OptimizerConfig c;
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.adam_epsilon = kv.get_double("adam_epsilon", c.adam_epsilon);
  c.lr_max = kv.get_double("lr_max", c.lr_max);
  c.lr_min = kv.get_double("lr_min", c.lr_min);
  c.total_steps = kv.get_int64("total_steps", c.total_steps);
  c.batch = kv.get_int64("batch", c.batch);
  c.crop = kv.get_int64("crop", c.crop);
  c.lambda_perceptual = kv.get_double("lambda_perceptual", c.lambda_perceptual);
  c.validation_every = kv.get_int64("validation_every", c.validation_every);
  c.validation_fraction = kv.get_double("validation_fraction", c.validation_fraction);
  c.seed = static_cast<std::uint64_t>(kv.get_int64("seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

std::string to_text(const OptimizerConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "beta1 = " << c.beta1 << "\nbeta2 = " << c.beta2 << "\nadam_epsilon = " << c.adam_epsilon
     << "\nlr_max = " << c.lr_max << "\nlr_min = " << c.lr_min
     << "\ntotal_steps = " << c.total_steps << "\nbatch = " << c.batch << "\ncrop = " << c.crop
     << "\nlambda_perceptual = " << c.lambda_perceptual
     << "\nvalidation_every = " << c.validation_every
     << "\nvalidation_fraction = " << c.validation_fraction << "\nseed = " << c.seed << '\n';
  return os.str();
}

double cosine_lr(std::int64_t step, const OptimizerConfig& cfg) {
  if (step < 0) throw ArgumentError("cosine_lr: negative step");
  if (step >= cfg.total_steps) return cfg.lr_min;
  const double progress = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
  return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

double adam_update(double param, double grad, AdamMoments& mo, std::int64_t t, double lr,
                   const OptimizerConfig& cfg) {
  mo.m = cfg.beta1 * mo.m + (1.0 - cfg.beta1) * grad;
  mo.v = cfg.beta2 * mo.v + (1.0 - cfg.beta2) * grad * grad;
  const double m_hat = mo.m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
  const double v_hat = mo.v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
  return param - lr * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
}

Adam::Adam(const WeightStore& params, const OptimizerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (const auto& e : params.entries()) {
    moments_.emplace_back(static_cast<std::size_t>(e.tensor.numel()));
  }
}

void Adam::step(WeightStore& params, double lr) {
  if (params.size() != moments_.size()) throw ArgumentError("Adam: parameter set changed");
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params.entries()[i].tensor;
    if (!t.requires_grad() || !t.has_grad()) continue;
    auto d = t.data();
    const auto g = std::as_const(t).grad();
    auto& mo = moments_[i];
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = static_cast<float>(adam_update(d[k], g[k], mo[k], t_, lr, cfg_));
    }
  }
}

double gradient_norm(const WeightStore& params) {
  double acc = 0.0;
  for (const auto& e : params.entries()) {
    if (!e.tensor.has_grad()) continue;
    for (float g : e.tensor.grad()) acc += static_cast<double>(g) * g;
  }
  return std::sqrt(acc);
}

}  // namespace flol
