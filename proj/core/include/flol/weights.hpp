// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flol/tensor.hpp"

namespace flol {

enum class WeightErrorKind {
  kIo,              // file missing or unreadable
  kManifest,        // malformed or inconsistent manifest
  kTruncated,       // blob shorter than the manifest declares
  kShapeMismatch,   // tensor shape differs from the configured architecture
  kMissingTensor,   // configured tensor absent from the store
  kUnexpectedTensor,
  kDuplicateName,
};

std::string_view to_string(WeightErrorKind kind);

class WeightError : public std::runtime_error {
public:
  WeightError(WeightErrorKind kind, std::string tensor, const std::string& message);
  WeightErrorKind kind() const noexcept { return kind_; }
  /// Offending tensor name; empty when the error is not tensor-specific.
  const std::string& tensor() const noexcept { return tensor_; }

private:
  WeightErrorKind kind_;
  std::string tensor_;
};

struct WeightEntry {
  std::string name;
  Tensor tensor;
};

/// Ordered, uniquely named collection of parameter tensors.
class WeightStore {
public:
  void add(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;

  const std::vector<WeightEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t total_elements() const;

  /// Deep copy; gradient flags are carried over, gradient buffers are not.
  WeightStore clone() const;
  void set_requires_grad(bool value);
  void zero_grad();

  /// Bit-level equality of names, shapes and values.
  bool identical(const WeightStore& other) const;

private:
  std::vector<WeightEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// On-disk container:
//   FLOLW 1\n
//   <tensor count> <blob bytes>\n
//   <name> <rank> <d0> ... <d{rank-1}> <byte offset>\n     (one per tensor)
//   <blob: little-endian float32, tensors back to back in manifest order>
std::string serialize_weights(const WeightStore& store);
WeightStore deserialize_weights(std::string_view bytes);

void save_weights(const WeightStore& store, const std::filesystem::path& path);
/// Structural load only; see load_weights(path, config) in model.hpp for
/// architecture validation.
WeightStore load_weights(const std::filesystem::path& path);

}  // namespace flol
