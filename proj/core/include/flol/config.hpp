// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flol {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// How the decoder merges encoder skips: channel concatenation followed by a
/// 3x3 fusion conv, or plain element-wise addition.
enum class SkipMode { kConcat, kAdd };

std::string_view to_string(SkipMode mode);
SkipMode parse_skip_mode(std::string_view text);

/// Architecture hyperparameters shared by both stages.
struct ModelConfig {
  int nc = 16;
  SkipMode skip_mode = SkipMode::kConcat;
  int fie_blocks = 3;
  int ffn_expansion = 2;
  int snr_blur = 5;
  float map_epsilon = 1e-4F;
  float snr_epsilon = 1e-4F;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// `key = value` text with `#` comments; keys are unique.
class KeyValueFile {
public:
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  long long get_int64(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
  std::map<std::string, std::string> values_;
};

/// Reads ModelConfig fields from a key-value file; absent keys keep defaults.
ModelConfig model_config_from(const KeyValueFile& kv);
ModelConfig load_model_config(const std::filesystem::path& path);
std::string to_text(const ModelConfig& cfg);

}  // namespace flol
