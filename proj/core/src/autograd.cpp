/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/autograd.hpp"

#include <unordered_set>

#include "superyolo/error.hpp"

namespace superyolo::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T>& Node<T>::grad_buffer() {
  if (!grad.defined()) grad = Tensor<T>(value.shape());
  return grad;
}

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_ && node_->grad.defined()) node_->grad.fill(T(0));
}

template <typename T>
void Var<T>::backward() {
  if (value().numel() != 1) throw ShapeError("backward() without a seed needs a scalar root");
  backward(Tensor<T>(value().shape(), T(1)));
}

template <typename T>
void Var<T>::backward(const Tensor<T>& seed) {
  if (!node_) throw Error("backward() on an undefined Var");
  if (seed.shape() != value().shape()) throw ShapeError("backward seed shape mismatch");

  // Iterative post-order DFS gives a topological order without recursion depth limits.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->grad_buffer().add_(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward && node->grad.defined()) node->backward(*node);
  }
}

template <typename T>
Var<T> make_result(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn<T> fn) {
  Var<T> out(std::move(value), false);
  if (!grad_enabled() || out.value().is_meta()) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (!needs) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) node.inputs.push_back(in.node());
  node.backward = std::move(fn);
  return out;
}

template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template Var<float> make_result(Tensor<float>, const std::vector<Var<float>>&, BackwardFn<float>);
template Var<double> make_result(Tensor<double>, const std::vector<Var<double>>&, BackwardFn<double>);

}  // namespace superyolo::nn
