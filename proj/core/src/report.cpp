// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace flol {

namespace {

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw ReportError(std::string(what) + " contains a tab or newline: '" + s + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const std::string* Report::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::size_t Report::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ReportError("report has no column '" + name + "'");
}

void write_report(std::ostream& os, const Report& report) {
  if (report.columns.empty()) throw ReportError("report without columns");
  for (const auto& [k, v] : report.meta) {
    check_field(k, "meta key");
    check_field(v, "meta value");
    if (k.empty() || k.find('=') != std::string::npos) throw ReportError("bad meta key '" + k + "'");
    os << "# " << k << '=' << v << '\n';
  }
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    check_field(report.columns[i], "column");
    os << (i ? "\t" : "") << report.columns[i];
  }
  os << '\n';
  for (const auto& row : report.rows) {
    if (row.size() != report.columns.size()) throw ReportError("row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      check_field(row[i], "field");
      os << (i ? "\t" : "") << row[i];
    }
    os << '\n';
  }
}

Report read_report(std::istream& is) {
  Report r;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ReportError("line " + std::to_string(lineno) + ": meta without '='");
      r.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      r.columns = split_tabs(line);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != r.columns.size()) {
      throw ReportError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(r.columns.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    r.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ReportError("report has no header line");
  return r;
}

void save_report(const std::filesystem::path& path, const Report& report) {
  std::ostringstream os;
  write_report(os, report);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ReportError("cannot write report " + path.string());
  f << os.str();
  if (!f) throw ReportError("failed writing report " + path.string());
}

Report load_report(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ReportError("cannot read report " + path.string());
  return read_report(f);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ReportError("not a number: '" + text + "'");
  }
  return v;
}

}  // namespace flol
