// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "flol/config.hpp"
#include "flol/optim.hpp"

namespace flol::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags or malformed config file
  kUnreadableInput = 2,
  kWeightsMismatch = 3,  // missing, corrupt or architecture-incompatible weights
  kEmptyDataset = 4,
  kFailure = 5,        // output not writable, training diverged, anything else
};

/// Model and optimizer settings read from one key = value file. Keys that
/// belong to neither are rejected so typos do not silently fall back.
struct RunConfig {
  ModelConfig model;
  OptimizerConfig optimizer;
};

RunConfig load_run_config(const std::string& path);

/// Runs the tool with argv-style arguments (args[0] is the program name).
/// Never calls exit(); diagnostics go to `err`, progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flol::cli
