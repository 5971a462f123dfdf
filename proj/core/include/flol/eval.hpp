// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "flol/config.hpp"
#include "flol/degradation.hpp"
#include "flol/report.hpp"
#include "flol/weights.hpp"

namespace flol {

struct EvalRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;

  Report to_report() const;
  static EvalReport from_report(const Report& report);
};

/// Enhances every low image and scores it against its reference.
EvalReport evaluate_dataset(const std::vector<ImagePair>& pairs, const WeightStore& weights,
                            const ModelConfig& config);

}  // namespace flol
