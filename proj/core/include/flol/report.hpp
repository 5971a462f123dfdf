// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flol {

class ReportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Line-delimited table: "# key=value" metadata lines, one tab-separated
/// header line, then one tab-separated record per line.
struct Report {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string* meta_value(const std::string& key) const;
  std::size_t column(const std::string& name) const;  // throws ReportError when absent
};

void write_report(std::ostream& os, const Report& report);
Report read_report(std::istream& is);
void save_report(const std::filesystem::path& path, const Report& report);
Report load_report(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

}  // namespace flol
