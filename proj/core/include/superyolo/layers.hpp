/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "superyolo/autograd.hpp"
#include "superyolo/random.hpp"

namespace superyolo::nn {

template <typename T>
struct NamedParameter {
  std::string name;
  Var<T> var;
  bool decay;  ///< subject to weight decay (convolution kernels only)
};

template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

/// Parameter/buffer/child registry with dotted hierarchical names
/// ("backbone.layers.3.cv1.conv.weight"). Forward signatures live on the
/// concrete modules.
template <typename T>
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  void set_training(bool training);
  bool training() const { return training_; }

  std::vector<NamedParameter<T>> named_parameters(const std::string& prefix = "") const;
  std::vector<NamedBuffer<T>> named_buffers(const std::string& prefix = "") const;
  int64_t parameter_count() const;
  void zero_grad();

 protected:
  Var<T> register_parameter(std::string name, Tensor<T> init, bool decay);
  Tensor<T>* register_buffer(std::string name, Tensor<T> init);
  void register_module(std::string name, Module& child);

 private:
  bool training_ = true;
  std::vector<NamedParameter<T>> params_;
  std::vector<std::pair<std::string, std::unique_ptr<Tensor<T>>>> buffers_;
  std::vector<std::pair<std::string, Module*>> children_;
};

/// Plain convolution. Weights use the Kaiming-uniform rule with a = sqrt(5),
/// i.e. U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the bias uses the same bound.
template <typename T>
class Conv2d : public Module<T> {
 public:
  Conv2d(int in, int out, int kernel, int stride, int padding, bool bias, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

  Var<T>& weight() { return weight_; }
  Var<T>& bias() { return bias_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

 private:
  int in_, out_, stride_, padding_;
  Var<T> weight_, bias_;
};

/// Transposed convolution with weight [in, out, k, k].
template <typename T>
class ConvTranspose2d : public Module<T> {
 public:
  ConvTranspose2d(int in, int out, int kernel, int stride, int padding, bool bias, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

  Var<T>& weight() { return weight_; }
  Var<T>& bias() { return bias_; }

 private:
  int stride_, padding_;
  Var<T> weight_, bias_;
};

template <typename T>
class BatchNorm2d : public Module<T> {
 public:
  static constexpr double kEps = 1e-3;
  static constexpr double kMomentum = 0.03;

  explicit BatchNorm2d(int channels, double eps = kEps, double momentum = kMomentum);
  Var<T> forward(const Var<T>& x) const;

  Var<T>& gamma() { return gamma_; }
  Var<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return *running_mean_; }
  Tensor<T>& running_var() { return *running_var_; }

 private:
  double eps_, momentum_;
  Var<T> gamma_, beta_;
  Tensor<T>* running_mean_;
  Tensor<T>* running_var_;
};

/// Convolution (no bias, same padding) -> batch norm -> SiLU.
template <typename T>
class Cbs : public Module<T> {
 public:
  Cbs(int in, int out, int kernel, int stride, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

  Conv2d<T>& conv() { return conv_; }
  BatchNorm2d<T>& bn() { return bn_; }

 private:
  Conv2d<T> conv_;
  BatchNorm2d<T> bn_;
};

/// 1x1 CBS -> 3x3 CBS with an identity shortcut when enabled and widths agree.
template <typename T>
class Bottleneck : public Module<T> {
 public:
  Bottleneck(int in, int out, bool shortcut, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Cbs<T> cv1_, cv2_;
  bool add_;
};

/// Cross-stage-partial block: the input is projected into two half-width
/// branches; one runs through `n` bottlenecks, the other skips; the two are
/// concatenated and fused by a 1x1 CBS.
template <typename T>
class CspBlock : public Module<T> {
 public:
  CspBlock(int in, int out, int n, bool shortcut, Rng& rng);
  Var<T> forward(const Var<T>& x) const;
  int bottlenecks() const { return static_cast<int>(m_.size()); }

 private:
  Cbs<T> cv1_, cv2_, cv3_;
  std::vector<std::unique_ptr<Bottleneck<T>>> m_;
};

/// Spatial pyramid pooling: 1x1 CBS, parallel stride-1 max pools, concat, 1x1 CBS.
template <typename T>
class Spp : public Module<T> {
 public:
  Spp(int in, int out, std::vector<int> kernels, Rng& rng);
  Var<T> forward(const Var<T>& x) const;
  /// The concatenation [x', pool_k1(x'), ...] before the output CBS.
  Var<T> pooled(const Var<T>& x) const;

 private:
  Cbs<T> cv1_, cv2_;
  std::vector<int> kernels_;
};

/// Space-to-depth by 2 followed by a CBS over the 4x channels.
template <typename T>
class Focus : public Module<T> {
 public:
  Focus(int in, int out, int kernel, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Cbs<T> conv_;
};

/// Squeeze-and-excitation channel gate: y = x * sigmoid(W2 relu(W1 avgpool(x))).
template <typename T>
class SqueezeExcite : public Module<T> {
 public:
  SqueezeExcite(int channels, int reduction, Rng& rng);
  Var<T> forward(const Var<T>& x) const;
  /// Per-channel gate [N, C, 1, 1] in (0, 1).
  Var<T> gate(const Var<T>& x) const;

  int hidden() const { return hidden_; }
  Conv2d<T>& squeeze() { return fc1_; }
  Conv2d<T>& expand() { return fc2_; }

 private:
  int hidden_;
  Conv2d<T> fc1_, fc2_;
};

/// 3x3 convolution with bias followed by ReLU.
template <typename T>
class ConvRelu : public Module<T> {
 public:
  ConvRelu(int in, int out, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Conv2d<T> conv_;
};

/// EDSR residual block without normalization: x + scale * conv(relu(conv(x))).
template <typename T>
class ResBlock : public Module<T> {
 public:
  ResBlock(int width, double res_scale, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Conv2d<T> conv1_, conv2_;
  double res_scale_;
};

}  // namespace superyolo::nn
