// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "flol/dataset.hpp"
#include "flol/loss.hpp"
#include "flol/metrics.hpp"
#include "flol/model.hpp"

namespace flol {

TrainingDivergence::TrainingDivergence(std::int64_t step, std::string term,
                                       const std::string& detail)
    : std::runtime_error("training diverged at step " + std::to_string(step) + " in " + term +
                         ": " + detail),
      step_(step),
      term_(std::move(term)) {}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void check_term(std::int64_t step, const char* name, const Tensor& t) {
  if (!std::isfinite(t.item())) throw TrainingDivergence(step, name, "non-finite value");
}

}  // namespace

std::string format_train_header() {
  return "step\tlr\tl1_final\tl1_intermediate\tperceptual\ttotal\tgrad_norm\tval_psnr";
}

std::string format_train_record(const TrainRecord& r) {
  return std::to_string(r.step) + '\t' + fmt(r.lr) + '\t' + fmt(r.l1_final) + '\t' +
         fmt(r.l1_intermediate) + '\t' + fmt(r.perceptual) + '\t' + fmt(r.total) + '\t' +
         fmt(r.grad_norm) + '\t' + (r.validation_psnr ? fmt(*r.validation_psnr) : "-");
}

double evaluate_loss(const std::vector<ImagePair>& pairs, const WeightStore& weights,
                     const ModelConfig& config, double lambda) {
  if (pairs.empty()) throw DatasetError("evaluate_loss: no pairs");
  const Model model(weights, config);
  double total = 0.0;
  for (const auto& p : pairs) {
    const auto r = model.forward(as_batch(p.low));
    total += total_loss(r.x_hat_raw, r.x_lol_raw, as_batch(p.high), lambda).total.item();
  }
  return total / static_cast<double>(pairs.size());
}

double mean_psnr(const std::vector<ImagePair>& pairs, const WeightStore* weights,
                 const ModelConfig& config) {
  if (pairs.empty()) throw DatasetError("mean_psnr: no pairs");
  std::optional<Model> model;
  if (weights != nullptr) model.emplace(*weights, config);
  double total = 0.0;
  for (const auto& p : pairs) {
    total += model ? psnr(model->forward(as_batch(p.low)).x_hat, as_batch(p.high))
                   : psnr(p.low, p.high);
  }
  return total / static_cast<double>(pairs.size());
}

TrainResult train_loop(const std::vector<ImagePair>& dataset, const TrainOptions& options) {
  if (dataset.empty()) throw DatasetError("train_loop: empty dataset");
  const ModelConfig& mcfg = options.model;
  const OptimizerConfig& ocfg = options.optimizer;
  mcfg.validate();
  ocfg.validate();

  const DatasetSplit split = split_dataset(dataset, ocfg.validation_fraction, ocfg.seed);
  WeightStore weights = options.initial_weights ? options.initial_weights->clone()
                                                : init_weights(mcfg, ocfg.seed);
  validate_weights(weights, mcfg);
  weights.set_requires_grad(true);
  Adam adam(weights, ocfg);
  const Model model(weights, mcfg);
  const SobelGradientLoss perceptual;

  std::optional<std::ofstream> log_file;
  if (options.log_path) {
    log_file.emplace(*options.log_path);
    if (!*log_file) throw std::runtime_error("cannot open log " + options.log_path->string());
    *log_file << format_train_header() << '\n';
  }

  TrainResult result;
  result.validation = split.validation;
  std::mt19937_64 rng(ocfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  for (std::int64_t step = 0; step < ocfg.total_steps; ++step) {
    std::vector<std::size_t> indices;
    while (static_cast<std::int64_t>(indices.size()) < ocfg.batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      indices.push_back(order[cursor++]);
    }
    const Batch batch = make_batch(split.train, indices, ocfg.crop, rng);

    TrainRecord rec;
    rec.step = step;
    rec.lr = cosine_lr(step, ocfg);
    {
      GradTape tape;
      LossBreakdown loss;
      try {
        const auto out = model.forward(batch.low);
        loss = total_loss(out.x_hat_raw, out.x_lol_raw, batch.high, ocfg.lambda_perceptual,
                          perceptual);
      } catch (const NonFiniteError& e) {
        throw TrainingDivergence(step, "forward", e.what());
      }
      check_term(step, "l1_final", loss.l1_final);
      check_term(step, "l1_intermediate", loss.l1_intermediate);
      check_term(step, "perceptual", loss.perceptual);
      check_term(step, "total", loss.total);
      weights.zero_grad();
      tape.backward(loss.total);
      rec.l1_final = loss.l1_final.item();
      rec.l1_intermediate = loss.l1_intermediate.item();
      rec.perceptual = loss.perceptual.item();
      rec.total = loss.total.item();
    }
    rec.grad_norm = gradient_norm(weights);
    if (!std::isfinite(rec.grad_norm)) {
      throw TrainingDivergence(step, "gradient", "non-finite gradient norm");
    }
    adam.step(weights, rec.lr);

    const bool last = step + 1 == ocfg.total_steps;
    if (!split.validation.empty() && ((step + 1) % ocfg.validation_every == 0 || last)) {
      rec.validation_psnr = mean_psnr(split.validation, &weights, mcfg);
      if (result.best_step < 0 || *rec.validation_psnr > result.best_validation_psnr) {
        result.best_validation_psnr = *rec.validation_psnr;
        result.best_step = step;
        result.best_weights = weights.clone();
      }
    }
    if (log_file) *log_file << format_train_record(rec) << '\n' << std::flush;
    if (options.on_record) options.on_record(rec);
    result.log.push_back(rec);
  }

  result.final_weights = weights.clone();
  result.final_weights.set_requires_grad(false);
  if (result.best_step < 0) {
    result.best_step = ocfg.total_steps - 1;
    result.best_weights = result.final_weights.clone();
  }
  result.best_weights.set_requires_grad(false);
  if (options.weights_path) save_weights(result.best_weights, *options.weights_path);
  return result;
}

}  // namespace flol
