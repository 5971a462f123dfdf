// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/eval.hpp"

#include "flol/dataset.hpp"
#include "flol/metrics.hpp"
#include "flol/model.hpp"

namespace flol {

Report EvalReport::to_report() const {
  Report r;
  r.meta = {{"kind", "eval"},
            {"images", std::to_string(rows.size())},
            {"mean_psnr", format_double(mean_psnr)},
            {"mean_ssim", format_double(mean_ssim)}};
  r.columns = {"id", "psnr", "ssim"};
  for (const auto& row : rows) {
    r.rows.push_back({row.id, format_double(row.psnr), format_double(row.ssim)});
  }
  return r;
}

EvalReport EvalReport::from_report(const Report& r) {
  EvalReport e;
  const auto id = r.column("id");
  const auto ps = r.column("psnr");
  const auto ss = r.column("ssim");
  for (const auto& row : r.rows) {
    e.rows.push_back({row[id], parse_double(row[ps]), parse_double(row[ss])});
  }
  const auto* mp = r.meta_value("mean_psnr");
  const auto* ms = r.meta_value("mean_ssim");
  if (mp == nullptr || ms == nullptr) throw ReportError("eval report lacks mean lines");
  e.mean_psnr = parse_double(*mp);
  e.mean_ssim = parse_double(*ms);
  return e;
}

EvalReport evaluate_dataset(const std::vector<ImagePair>& pairs, const WeightStore& weights,
                            const ModelConfig& config) {
  if (pairs.empty()) throw DatasetError("evaluate_dataset: no pairs");
  const Model model(weights, config);
  EvalReport report;
  double sp = 0.0;
  double ss = 0.0;
  for (const auto& p : pairs) {
    const Tensor out = model.forward(as_batch(p.low)).x_hat;
    const Tensor ref = as_batch(p.high);
    EvalRow row{p.id, psnr(out, ref), ssim(out, ref)};
    sp += row.psnr;
    ss += row.ssim;
    report.rows.push_back(std::move(row));
  }
  report.mean_psnr = sp / static_cast<double>(pairs.size());
  report.mean_ssim = ss / static_cast<double>(pairs.size());
  return report;
}

}  // namespace flol
