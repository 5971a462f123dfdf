// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace flol {

std::string_view to_string(SkipMode mode) {
  return mode == SkipMode::kConcat ? "concat" : "add";
}

SkipMode parse_skip_mode(std::string_view text) {
  if (text == "concat") return SkipMode::kConcat;
  if (text == "add") return SkipMode::kAdd;
  throw ConfigError("unknown skip_mode '" + std::string(text) + "' (expected concat or add)");
}

void ModelConfig::validate() const {
  if (nc < 1) throw ConfigError("nc must be >= 1");
  if (fie_blocks < 1) throw ConfigError("fie_blocks must be >= 1");
  if (ffn_expansion < 1) throw ConfigError("ffn_expansion must be >= 1");
  if (snr_blur < 1 || snr_blur % 2 == 0) throw ConfigError("snr_blur must be a positive odd size");
  if (!(map_epsilon > 0.0F)) throw ConfigError("map_epsilon must be > 0");
  if (!(snr_epsilon > 0.0F)) throw ConfigError("snr_epsilon must be > 0");
}

namespace {
std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!kv.values_.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return std::nullopt;
}

long long KeyValueFile::get_int64(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  const auto* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not an integer");
  }
  return out;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_int64(key, fallback));
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not a number");
  }
}

ModelConfig model_config_from(const KeyValueFile& kv) {
  ModelConfig cfg;
  cfg.nc = kv.get_int("nc", cfg.nc);
  if (auto mode = kv.get("skip_mode")) cfg.skip_mode = parse_skip_mode(*mode);
  cfg.fie_blocks = kv.get_int("fie_blocks", cfg.fie_blocks);
  cfg.ffn_expansion = kv.get_int("ffn_expansion", cfg.ffn_expansion);
  cfg.snr_blur = kv.get_int("snr_blur", cfg.snr_blur);
  cfg.map_epsilon = static_cast<float>(kv.get_double("map_epsilon", cfg.map_epsilon));
  cfg.snr_epsilon = static_cast<float>(kv.get_double("snr_epsilon", cfg.snr_epsilon));
  cfg.validate();
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  return model_config_from(KeyValueFile::load(path));
}

std::string to_text(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "nc = " << cfg.nc << '\n'
     << "skip_mode = " << to_string(cfg.skip_mode) << '\n'
     << "fie_blocks = " << cfg.fie_blocks << '\n'
     << "ffn_expansion = " << cfg.ffn_expansion << '\n'
     << "snr_blur = " << cfg.snr_blur << '\n'
     << "map_epsilon = " << cfg.map_epsilon << '\n'
     << "snr_epsilon = " << cfg.snr_epsilon << '\n';
  return os.str();
}

}  // namespace flol
