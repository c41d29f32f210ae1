/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "superyolo/layers.hpp"

namespace superyolo::train {

/// SGD with (Nesterov) momentum and decoupled-from-nothing L2 weight decay:
///   d = g + wd * p (decay-flagged parameters only)
///   buf = momentum * buf + d        (buf = d on the first step)
///   p -= lr * (nesterov ? d + momentum * buf : buf)
class Sgd {
 public:
  Sgd(std::vector<nn::NamedParameter<float>> params, double momentum, double weight_decay, bool nesterov);

  void step(double lr);
  void zero_grad();

  /// Momentum buffers keyed by parameter name (empty before the first step).
  std::map<std::string, nn::Tensor<float>> state() const;
  void load_state(const std::map<std::string, nn::Tensor<float>>& state);

 private:
  std::vector<nn::NamedParameter<float>> params_;
  std::vector<nn::Tensor<float>> buffers_;
  double momentum_;
  double weight_decay_;
  bool nesterov_;
};

/// Learning rate at optimizer step `step` (0-based): cosine decay from lr0 to
/// lr0 * lrf over `total_steps`, multiplied by a linear ramp (step + 1) /
/// warmup_steps during the first `warmup_steps` steps.
double learning_rate(int64_t step, int64_t total_steps, int64_t warmup_steps, double lr0, double lrf);

}  // namespace superyolo::train
