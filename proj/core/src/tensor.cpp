// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flol {

std::int64_t numel_of(const Shape& shape) {
  std::int64_t n = 1;
  for (auto extent : shape) {
    if (extent < 0) throw DimensionError("negative extent in shape " + shape_str(shape));
    n *= extent;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : node_(std::make_shared<detail::TensorNode>()) {
  const auto n = numel_of(shape);
  node_->shape = std::move(shape);
  node_->data.assign(static_cast<std::size_t>(n), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : node_(std::make_shared<detail::TensorNode>()) {
  const auto n = numel_of(shape);
  if (static_cast<std::int64_t>(values.size()) != n) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " needs " + std::to_string(n) +
                         " values, got " + std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

detail::TensorNode& Tensor::node() const {
  if (!node_) throw ArgumentError("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::int64_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(s));
  }
  return s[axis];
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(node().data.size()); }

std::span<float> Tensor::data() { return node().data; }
std::span<const float> Tensor::data() const { return node().data; }

float Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node().data[0];
}

float& Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
  const auto& s = shape();
  return node().data[static_cast<std::size_t>(((n * s[1] + c) * s[2] + h) * s[3] + w)];
}

float Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
  const auto& s = shape();
  return node().data[static_cast<std::size_t>(((n * s[1] + c) * s[2] + h) * s[3] + w)];
}

Tensor& Tensor::set_requires_grad(bool value) {
  node().requires_grad = value;
  return *this;
}

std::span<float> Tensor::grad() { return node().grad; }
std::span<const float> Tensor::grad() const { return node().grad; }

std::span<float> Tensor::ensure_grad() const {
  auto& nd = node();
  if (nd.grad.empty()) nd.grad.assign(nd.data.size(), 0.0F);
  return nd.grad;
}

void Tensor::zero_grad() {
  auto& nd = node();
  std::fill(nd.grad.begin(), nd.grad.end(), 0.0F);
}

Tensor Tensor::detach() const {
  const auto& nd = node();
  return Tensor(nd.shape, nd.data);
}

Tensor Tensor::clone() const {
  Tensor t = detach();
  t.set_requires_grad(requires_grad());
  return t;
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel_of(shape) != numel()) {
    throw DimensionError("cannot reshape " + shape_str(this->shape()) + " to " +
                         shape_str(shape));
  }
  return Tensor(std::move(shape), node().data);
}

void check_finite(const Tensor& t, std::string_view where) {
  const auto d = t.data();
  // Branch-free scan first so the common all-finite case vectorizes.
  bool bad = false;
  for (const float v : d) bad |= !(std::abs(v) <= std::numeric_limits<float>::max());
  if (!bad) return;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) {
      throw NonFiniteError(std::string(where) + ": non-finite value at flat index " +
                           std::to_string(i));
    }
  }
}

namespace {
thread_local GradTape* g_active_tape = nullptr;
thread_local FlopScope* g_active_flops = nullptr;
}  // namespace

GradTape::GradTape() : previous_(g_active_tape) { g_active_tape = this; }

GradTape::~GradTape() { g_active_tape = previous_; }

GradTape* GradTape::active() noexcept { return g_active_tape; }

void GradTape::record(std::string_view op, std::vector<Tensor> inputs,
                      std::vector<Tensor> outputs, BackwardFn fn) {
  for (auto& out : outputs) out.set_requires_grad(true);
  entries_.push_back(Entry{op, std::move(inputs), std::move(outputs), std::move(fn)});
}

void GradTape::backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw DimensionError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  Tensor seed = loss;
  seed.ensure_grad()[0] += 1.0F;
  // Recording stays off while rules run so that rule-internal ops are not taped.
  GradTape* saved = g_active_tape;
  g_active_tape = nullptr;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const bool reached = std::any_of(it->outputs.begin(), it->outputs.end(),
                                     [](const Tensor& t) { return t.has_grad(); });
    if (reached) it->backward();
  }
  g_active_tape = saved;
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t != nullptr && t->requires_grad(); });
}

FlopScope::FlopScope() : previous_(g_active_flops) { g_active_flops = this; }

FlopScope::~FlopScope() { g_active_flops = previous_; }

void add_flops(std::uint64_t flops) {
  if (g_active_flops != nullptr) g_active_flops->count_ += flops;
}

}  // namespace flol
