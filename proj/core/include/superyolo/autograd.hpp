/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "superyolo/tensor.hpp"

namespace superyolo::nn {

template <typename T>
struct Node;

template <typename T>
using BackwardFn = std::function<void(Node<T>&)>;

/// One vertex of the reverse-mode tape. `backward` reads `grad` and
/// accumulates into the grads of `inputs`.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn<T> backward;

  /// Gradient buffer, zero-allocated on first use.
  Tensor<T>& grad_buffer();
};

/// Handle to a tape node. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Accumulated gradient; undefined tensor when nothing flowed here.
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& grad() { return node_->grad; }
  void zero_grad();

  /// Reverse sweep seeded with ones; the root must hold a single element.
  void backward();
  /// Reverse sweep seeded with `seed` (same shape as the value).
  void backward(const Tensor<T>& seed);

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Tape recording switch. Disabled inside `NoGradGuard`.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Wraps an op result. The node joins the tape only when recording is on and
/// some input needs a gradient; otherwise `fn` is dropped.
template <typename T>
Var<T> make_result(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn<T> fn);

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Var<float>;
extern template class Var<double>;

}  // namespace superyolo::nn
