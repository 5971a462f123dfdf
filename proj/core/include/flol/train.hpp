// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flol/config.hpp"
#include "flol/degradation.hpp"
#include "flol/optim.hpp"
#include "flol/weights.hpp"

namespace flol {

/// Non-finite loss or gradient during training.
class TrainingDivergence : public std::runtime_error {
public:
  TrainingDivergence(std::int64_t step, std::string term, const std::string& detail);
  std::int64_t step() const noexcept { return step_; }
  const std::string& term() const noexcept { return term_; }

private:
  std::int64_t step_;
  std::string term_;
};

struct TrainRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  double l1_final = 0.0;
  double l1_intermediate = 0.0;
  double perceptual = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  std::optional<double> validation_psnr;
};

struct TrainOptions {
  ModelConfig model;
  OptimizerConfig optimizer;
  /// Best-by-validation weights are written here when set.
  std::optional<std::filesystem::path> weights_path;
  /// Tab-separated per-step log.
  std::optional<std::filesystem::path> log_path;
  /// Starting point; seeded Kaiming initialization when absent.
  std::optional<WeightStore> initial_weights;
  std::function<void(const TrainRecord&)> on_record;
};

struct TrainResult {
  WeightStore final_weights;
  WeightStore best_weights;
  std::int64_t best_step = -1;
  double best_validation_psnr = 0.0;
  std::vector<TrainRecord> log;
  std::vector<ImagePair> validation;  // the held-out split used
};

/// Adam + cosine schedule on random augmented crops. Single-threaded and
/// fully determined by the optimizer seed.
TrainResult train_loop(const std::vector<ImagePair>& dataset, const TrainOptions& options);

/// Mean total loss over whole images, without gradients.
double evaluate_loss(const std::vector<ImagePair>& pairs, const WeightStore& weights,
                     const ModelConfig& config, double lambda);

/// Mean PSNR of the model output (or of the unprocessed input when `weights`
/// is null) against the references.
double mean_psnr(const std::vector<ImagePair>& pairs, const WeightStore* weights,
                 const ModelConfig& config);

std::string format_train_header();
std::string format_train_record(const TrainRecord& r);

}  // namespace flol
