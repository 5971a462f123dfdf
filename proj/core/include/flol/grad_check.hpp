// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flol/tensor.hpp"

namespace flol {

class GradCheckFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradCheckOptions {
  double step = 1e-3;
  /// Elements probed per parameter; 0 probes every element.
  std::size_t max_probes = 0;
  std::uint64_t probe_seed = 0;
  /// Directional mode: instead of probing elements, each parameter is moved
  /// as a whole along `directions` unit vectors v ~ sign(g) * u, u ~ U[0.5, 1],
  /// and the central difference is compared with g . v. The signal grows
  /// with the parameter size while float32 rounding noise in the loss does
  /// not, which keeps checks of deep graphs above the noise floor.
  bool directional = false;
  std::size_t directions = 3;
  /// Combine central differences at h, 2h and 4h as
  /// (64 D(h) - 20 D(2h) + D(4h)) / 45, cancelling the h^2 and h^4 truncation
  /// terms so a larger, less noisy h can be used.
  bool richardson = false;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
};

/// Compares tape gradients of sum(forward()) against central differences.
///
/// Per parameter the error is max_i |a_i - n_i| / max(max|a|, max|n|, 1e-8)
/// (directional mode: max_v |a_v - n_v| / max(|a_v|, |n_v|, 1e-8)); the
/// result is the worst parameter. The loss sum is accumulated in double.
/// Throws GradCheckFailure naming the parameter when a gradient is non-finite.
GradCheckResult grad_check(const std::function<Tensor()>& forward,
                           const std::vector<NamedTensor>& params,
                           const GradCheckOptions& options = {});

/// Convenience form: draws inputs of the given shapes uniformly in [-1, 1]
/// from `seed`, names them "input0", "input1", ... and checks `op`. Throws
/// GradCheckFailure when the error is not below `tolerance`.
double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& op,
                  const std::vector<Shape>& input_shapes, double tolerance,
                  std::uint64_t seed = 0);

}  // namespace flol
