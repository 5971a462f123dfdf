// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flol {

using Shape = std::vector<std::int64_t>;

/// Raised when operand shapes are incompatible with an operation.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for invalid scalar arguments (stride < 1, negative sizes, ...).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation produces or receives NaN/Inf.
class NonFiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct TensorNode {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until a backward pass reaches the node
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major float32 array with optional gradient buffer.
///
/// Tensor is a shared handle: copies alias the same storage. Use clone() for a
/// deep copy. Image and feature tensors use N x C x H x W layout.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0F);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0F); }
  static Tensor full(Shape shape, float value) { return Tensor(std::move(shape), value); }
  static Tensor scalar(float value) { return Tensor(Shape{1}, value); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::int64_t dim(std::size_t axis) const;
  std::int64_t numel() const;

  std::span<float> data();
  std::span<const float> data() const;
  float* ptr() { return data().data(); }
  const float* ptr() const { return data().data(); }
  float item() const;

  float& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w);
  float at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;

  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  Tensor& set_requires_grad(bool value);

  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  std::span<float> grad();
  std::span<const float> grad() const;
  /// Allocates a zero gradient buffer when absent and returns it.
  std::span<float> ensure_grad() const;
  void zero_grad();

  /// Deep copy of the values; the copy does not require grad.
  Tensor detach() const;
  Tensor clone() const;
  Tensor reshaped(Shape shape) const;

  bool is_same(const Tensor& other) const noexcept { return node_ == other.node_; }

private:
  detail::TensorNode& node() const;
  std::shared_ptr<detail::TensorNode> node_;
};

/// Throws NonFiniteError naming `where` if any element is NaN or Inf.
void check_finite(const Tensor& t, std::string_view where);

/// Records differentiable operations executed on this thread while alive.
///
/// Operations record an entry only when a tape is active and at least one
/// input requires grad. Backward replays entries in reverse order and
/// accumulates (adds) into every reachable input gradient.
class GradTape {
public:
  using BackwardFn = std::function<void()>;

  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  /// Seeds d(loss)/d(loss) = 1 and propagates to all recorded inputs.
  void backward(const Tensor& loss);
  std::size_t size() const noexcept { return entries_.size(); }

  static GradTape* active() noexcept;
  void record(std::string_view op, std::vector<Tensor> inputs, std::vector<Tensor> outputs,
              BackwardFn fn);

private:
  struct Entry {
    std::string_view op;
    std::vector<Tensor> inputs;
    std::vector<Tensor> outputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
  GradTape* previous_ = nullptr;
};

/// True when a tape is active and any of the tensors requires grad.
bool should_record(std::initializer_list<const Tensor*> inputs);

/// Counts floating point operations executed on this thread while alive.
class FlopScope {
public:
  FlopScope();
  ~FlopScope();
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;
  std::uint64_t count() const noexcept { return count_; }

private:
  friend void add_flops(std::uint64_t);
  std::uint64_t count_ = 0;
  FlopScope* previous_ = nullptr;
};

void add_flops(std::uint64_t flops);

}  // namespace flol
