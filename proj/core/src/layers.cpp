/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/layers.hpp"

#include <cmath>

#include "superyolo/error.hpp"
#include "superyolo/ops.hpp"

namespace superyolo::nn {

namespace {

template <typename T>
Tensor<T> uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

// ---------------------------------------------------------------- Module

template <typename T>
void Module<T>::set_training(bool training) {
  training_ = training;
  for (auto& [name, child] : children_) child->set_training(training);
}

template <typename T>
std::vector<NamedParameter<T>> Module<T>::named_parameters(const std::string& prefix) const {
  std::vector<NamedParameter<T>> out;
  for (const auto& p : params_) out.push_back({prefix + p.name, p.var, p.decay});
  for (const auto& [name, child] : children_) {
    auto sub = child->named_parameters(prefix + name + ".");
    out.insert(out.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
  }
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> Module<T>::named_buffers(const std::string& prefix) const {
  std::vector<NamedBuffer<T>> out;
  for (const auto& [name, tensor] : buffers_) out.push_back({prefix + name, tensor.get()});
  for (const auto& [name, child] : children_) {
    auto sub = child->named_buffers(prefix + name + ".");
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

template <typename T>
int64_t Module<T>::parameter_count() const {
  int64_t total = 0;
  for (const auto& p : named_parameters()) total += p.var.value().numel();
  return total;
}

template <typename T>
void Module<T>::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
  for (auto& [name, child] : children_) child->zero_grad();
}

template <typename T>
Var<T> Module<T>::register_parameter(std::string name, Tensor<T> init, bool decay) {
  Var<T> v(std::move(init), true);
  params_.push_back({std::move(name), v, decay});
  return v;
}

template <typename T>
Tensor<T>* Module<T>::register_buffer(std::string name, Tensor<T> init) {
  buffers_.emplace_back(std::move(name), std::make_unique<Tensor<T>>(std::move(init)));
  return buffers_.back().second.get();
}

template <typename T>
void Module<T>::register_module(std::string name, Module& child) {
  children_.emplace_back(std::move(name), &child);
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in, int out, int kernel, int stride, int padding, bool bias, Rng& rng)
    : in_(in), out_(out), stride_(stride), padding_(padding) {
  if (in < 1 || out < 1 || kernel < 1) throw ConfigError("Conv2d: non-positive width or kernel");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in) * kernel * kernel);
  weight_ = this->register_parameter("weight", uniform_tensor<T>({out, in, kernel, kernel}, bound, rng), true);
  if (bias) bias_ = this->register_parameter("bias", uniform_tensor<T>({1, out, 1, 1}, bound, rng), false);
}

template <typename T>
Var<T> Conv2d<T>::forward(const Var<T>& x) const {
  return conv2d(x, weight_, bias_, stride_, padding_);
}

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(int in, int out, int kernel, int stride, int padding, bool bias, Rng& rng)
    : stride_(stride), padding_(padding) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(out) * kernel * kernel);
  weight_ = this->register_parameter("weight", uniform_tensor<T>({in, out, kernel, kernel}, bound, rng), true);
  if (bias) bias_ = this->register_parameter("bias", uniform_tensor<T>({1, out, 1, 1}, bound, rng), false);
}

template <typename T>
Var<T> ConvTranspose2d<T>::forward(const Var<T>& x) const {
  return conv_transpose2d(x, weight_, bias_, stride_, padding_);
}

// ---------------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, double eps, double momentum) : eps_(eps), momentum_(momentum) {
  gamma_ = this->register_parameter("weight", Tensor<T>({1, channels, 1, 1}, T(1)), false);
  beta_ = this->register_parameter("bias", Tensor<T>({1, channels, 1, 1}, T(0)), false);
  running_mean_ = this->register_buffer("running_mean", Tensor<T>({1, channels, 1, 1}, T(0)));
  running_var_ = this->register_buffer("running_var", Tensor<T>({1, channels, 1, 1}, T(1)));
}

template <typename T>
Var<T> BatchNorm2d<T>::forward(const Var<T>& x) const {
  return batch_norm(x, gamma_, beta_, *running_mean_, *running_var_, this->training(), momentum_, eps_);
}

// ---------------------------------------------------------------- composites

template <typename T>
Cbs<T>::Cbs(int in, int out, int kernel, int stride, Rng& rng)
    : conv_(in, out, kernel, stride, kernel / 2, false, rng), bn_(out) {
  if (kernel % 2 == 0) throw ConfigError("Cbs: kernel must be odd");
  this->register_module("conv", conv_);
  this->register_module("bn", bn_);
}

template <typename T>
Var<T> Cbs<T>::forward(const Var<T>& x) const {
  return silu(bn_.forward(conv_.forward(x)));
}

template <typename T>
Bottleneck<T>::Bottleneck(int in, int out, bool shortcut, Rng& rng)
    : cv1_(in, out, 1, 1, rng), cv2_(out, out, 3, 1, rng), add_(shortcut && in == out) {
  this->register_module("cv1", cv1_);
  this->register_module("cv2", cv2_);
}

template <typename T>
Var<T> Bottleneck<T>::forward(const Var<T>& x) const {
  Var<T> y = cv2_.forward(cv1_.forward(x));
  return add_ ? add(x, y) : y;
}

template <typename T>
CspBlock<T>::CspBlock(int in, int out, int n, bool shortcut, Rng& rng)
    : cv1_(in, out / 2, 1, 1, rng), cv2_(in, out / 2, 1, 1, rng), cv3_(2 * (out / 2), out, 1, 1, rng) {
  if (n < 0) throw ConfigError("CspBlock: negative bottleneck count");
  this->register_module("cv1", cv1_);
  this->register_module("cv2", cv2_);
  this->register_module("cv3", cv3_);
  for (int i = 0; i < n; ++i) {
    m_.push_back(std::make_unique<Bottleneck<T>>(out / 2, out / 2, shortcut, rng));
    this->register_module("m." + std::to_string(i), *m_.back());
  }
}

template <typename T>
Var<T> CspBlock<T>::forward(const Var<T>& x) const {
  Var<T> a = cv1_.forward(x);
  for (const auto& b : m_) a = b->forward(a);
  return cv3_.forward(concat<T>({a, cv2_.forward(x)}));
}

template <typename T>
Spp<T>::Spp(int in, int out, std::vector<int> kernels, Rng& rng)
    : cv1_(in, in / 2, 1, 1, rng),
      cv2_(static_cast<int>(in / 2 * (kernels.size() + 1)), out, 1, 1, rng),
      kernels_(std::move(kernels)) {
  for (size_t i = 0; i < kernels_.size(); ++i) {
    if (kernels_[i] % 2 == 0) throw ConfigError("Spp: pool kernels must be odd");
    if (i > 0 && kernels_[i] <= kernels_[i - 1]) throw ConfigError("Spp: pool kernels must ascend");
  }
  this->register_module("cv1", cv1_);
  this->register_module("cv2", cv2_);
}

template <typename T>
Var<T> Spp<T>::pooled(const Var<T>& x) const {
  Var<T> y = cv1_.forward(x);
  std::vector<Var<T>> parts{y};
  for (int k : kernels_) parts.push_back(max_pool2d(y, k));
  return concat(parts);
}

template <typename T>
Var<T> Spp<T>::forward(const Var<T>& x) const {
  return cv2_.forward(pooled(x));
}

template <typename T>
Focus<T>::Focus(int in, int out, int kernel, Rng& rng) : conv_(4 * in, out, kernel, 1, rng) {
  this->register_module("conv", conv_);
}

template <typename T>
Var<T> Focus<T>::forward(const Var<T>& x) const {
  return conv_.forward(space_to_depth(x));
}

template <typename T>
SqueezeExcite<T>::SqueezeExcite(int channels, int reduction, Rng& rng)
    : hidden_(std::max(channels / std::max(reduction, 1), 1)),
      fc1_(channels, hidden_, 1, 1, 0, true, rng),
      fc2_(hidden_, channels, 1, 1, 0, true, rng) {
  fc2_.bias().value().fill(T(0));
  this->register_module("fc1", fc1_);
  this->register_module("fc2", fc2_);
}

template <typename T>
Var<T> SqueezeExcite<T>::gate(const Var<T>& x) const {
  return sigmoid(fc2_.forward(relu(fc1_.forward(global_avg_pool(x)))));
}

template <typename T>
Var<T> SqueezeExcite<T>::forward(const Var<T>& x) const {
  return mul(x, gate(x));
}

template <typename T>
ConvRelu<T>::ConvRelu(int in, int out, Rng& rng) : conv_(in, out, 3, 1, 1, true, rng) {
  this->register_module("conv", conv_);
}

template <typename T>
Var<T> ConvRelu<T>::forward(const Var<T>& x) const {
  return relu(conv_.forward(x));
}

template <typename T>
ResBlock<T>::ResBlock(int width, double res_scale, Rng& rng)
    : conv1_(width, width, 3, 1, 1, true, rng), conv2_(width, width, 3, 1, 1, true, rng), res_scale_(res_scale) {
  this->register_module("conv1", conv1_);
  this->register_module("conv2", conv2_);
}

template <typename T>
Var<T> ResBlock<T>::forward(const Var<T>& x) const {
  Var<T> body = conv2_.forward(relu(conv1_.forward(x)));
  if (res_scale_ != 1.0) body = scale(body, static_cast<T>(res_scale_));
  return add(x, body);
}

#define SUPERYOLO_INSTANTIATE_LAYERS(T) \
  template class Module<T>;             \
  template class Conv2d<T>;             \
  template class ConvTranspose2d<T>;    \
  template class BatchNorm2d<T>;        \
  template class Cbs<T>;                \
  template class Bottleneck<T>;         \
  template class CspBlock<T>;           \
  template class Spp<T>;                \
  template class Focus<T>;              \
  template class SqueezeExcite<T>;      \
  template class ConvRelu<T>;           \
  template class ResBlock<T>;

SUPERYOLO_INSTANTIATE_LAYERS(float)
SUPERYOLO_INSTANTIATE_LAYERS(double)

#undef SUPERYOLO_INSTANTIATE_LAYERS

}  // namespace superyolo::nn
