// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/weights.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flol {

std::string_view to_string(WeightErrorKind kind) {
  switch (kind) {
    case WeightErrorKind::kIo: return "io";
    case WeightErrorKind::kManifest: return "manifest";
    case WeightErrorKind::kTruncated: return "truncated";
    case WeightErrorKind::kShapeMismatch: return "shape-mismatch";
    case WeightErrorKind::kMissingTensor: return "missing-tensor";
    case WeightErrorKind::kUnexpectedTensor: return "unexpected-tensor";
    case WeightErrorKind::kDuplicateName: return "duplicate-name";
  }
  return "unknown";
}

WeightError::WeightError(WeightErrorKind kind, std::string tensor, const std::string& message)
    : std::runtime_error("weights [" + std::string(to_string(kind)) + "]" +
                         (tensor.empty() ? std::string() : " tensor '" + tensor + "'") + ": " +
                         message),
      kind_(kind),
      tensor_(std::move(tensor)) {}

void WeightStore::add(std::string name, Tensor tensor) {
  if (name.empty() ||
      std::any_of(name.begin(), name.end(), [](char c) { return c <= ' ' || c == 127; })) {
    throw WeightError(WeightErrorKind::kManifest, name, "names must be non-empty without whitespace");
  }
  if (!tensor.defined()) throw WeightError(WeightErrorKind::kManifest, name, "undefined tensor");
  if (index_.contains(name)) throw WeightError(WeightErrorKind::kDuplicateName, name, "already present");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
}

bool WeightStore::contains(std::string_view name) const { return index_.contains(std::string(name)); }

const Tensor& WeightStore::get(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw WeightError(WeightErrorKind::kMissingTensor, std::string(name), "not found");
  return entries_[it->second].tensor;
}

std::int64_t WeightStore::total_elements() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

WeightStore WeightStore::clone() const {
  WeightStore out;
  for (const auto& e : entries_) out.add(e.name, e.tensor.clone());
  return out;
}

void WeightStore::set_requires_grad(bool value) {
  for (auto& e : entries_) e.tensor.set_requires_grad(value);
}

void WeightStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

bool WeightStore::identical(const WeightStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.tensor.shape() != b.tensor.shape()) return false;
    const auto av = a.tensor.data();
    const auto bv = b.tensor.data();
    if (std::memcmp(av.data(), bv.data(), av.size_bytes()) != 0) return false;
  }
  return true;
}

namespace {

constexpr std::string_view kMagic = "FLOLW 1";

void put_le32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFU));
}

float get_le32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

// Reads one '\n'-terminated line starting at `pos`.
std::string_view next_line(std::string_view bytes, std::size_t& pos) {
  const auto nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) {
    throw WeightError(WeightErrorKind::kManifest, "", "manifest line not terminated");
  }
  auto line = bytes.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const auto b = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

std::uint64_t to_u64(std::string_view s, const std::string& tensor, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw WeightError(WeightErrorKind::kManifest, tensor,
                      std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string serialize_weights(const WeightStore& store) {
  std::ostringstream head;
  std::uint64_t blob = 0;
  for (const auto& e : store.entries()) blob += static_cast<std::uint64_t>(e.tensor.numel()) * 4;
  head << kMagic << '\n' << store.size() << ' ' << blob << '\n';
  std::uint64_t offset = 0;
  for (const auto& e : store.entries()) {
    head << e.name << ' ' << e.tensor.rank();
    for (auto d : e.tensor.shape()) head << ' ' << d;
    head << ' ' << offset << '\n';
    offset += static_cast<std::uint64_t>(e.tensor.numel()) * 4;
  }
  std::string out = head.str();
  out.reserve(out.size() + blob);
  for (const auto& e : store.entries()) {
    for (float v : e.tensor.data()) put_le32(out, v);
  }
  return out;
}

WeightStore deserialize_weights(std::string_view bytes) {
  if (bytes.empty()) throw WeightError(WeightErrorKind::kManifest, "", "empty file");
  std::size_t pos = 0;
  if (next_line(bytes, pos) != kMagic) {
    throw WeightError(WeightErrorKind::kManifest, "", "bad magic (expected 'FLOLW 1')");
  }
  const auto header = split(next_line(bytes, pos));
  if (header.size() != 2) throw WeightError(WeightErrorKind::kManifest, "", "bad count line");
  const auto count = to_u64(header[0], "", "tensor count");
  const auto blob_bytes = to_u64(header[1], "", "blob size");

  struct Item {
    std::string name;
    Shape shape;
    std::uint64_t offset;
  };
  std::vector<Item> items;
  std::uint64_t expected_offset = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto fields = split(next_line(bytes, pos));
    if (fields.size() < 3) throw WeightError(WeightErrorKind::kManifest, "", "short tensor line");
    Item item;
    item.name = std::string(fields[0]);
    const auto rank = to_u64(fields[1], item.name, "rank");
    if (fields.size() != rank + 3) {
      throw WeightError(WeightErrorKind::kManifest, item.name, "field count does not match rank");
    }
    std::uint64_t elems = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const auto extent = to_u64(fields[2 + d], item.name, "extent");
      if (extent > (1ULL << 31)) throw WeightError(WeightErrorKind::kManifest, item.name, "extent too large");
      item.shape.push_back(static_cast<std::int64_t>(extent));
      elems *= extent;
    }
    item.offset = to_u64(fields[2 + rank], item.name, "offset");
    if (item.offset != expected_offset) {
      throw WeightError(WeightErrorKind::kManifest, item.name,
                        "offset " + std::to_string(item.offset) + " overlaps or leaves a gap (expected " +
                            std::to_string(expected_offset) + ")");
    }
    expected_offset += elems * 4;
    items.push_back(std::move(item));
  }
  if (expected_offset != blob_bytes) {
    throw WeightError(WeightErrorKind::kManifest, "", "tensor sizes do not add up to the blob size");
  }
  const auto available = bytes.size() - pos;
  if (available < blob_bytes) {
    throw WeightError(WeightErrorKind::kTruncated, "",
                      "blob has " + std::to_string(available) + " bytes, manifest declares " +
                          std::to_string(blob_bytes));
  }
  if (available > blob_bytes) {
    throw WeightError(WeightErrorKind::kManifest, "", "trailing bytes after blob");
  }
  WeightStore store;
  const char* blob = bytes.data() + pos;
  for (auto& item : items) {
    const auto n = static_cast<std::size_t>(numel_of(item.shape));
    std::vector<float> values(n);
    for (std::size_t k = 0; k < n; ++k) values[k] = get_le32(blob + item.offset + 4 * k);
    store.add(item.name, Tensor(std::move(item.shape), std::move(values)));
  }
  return store;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WeightError(WeightErrorKind::kIo, "", "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightError(WeightErrorKind::kIo, "", "write failed for " + path.string());
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightError(WeightErrorKind::kIo, "", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_weights(ss.str());
}

}  // namespace flol
