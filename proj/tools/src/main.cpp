// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "flol_tools/cli.hpp"

int main(int argc, char** argv) {
  return flol::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
