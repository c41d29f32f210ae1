/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/optim.hpp"

#include <cmath>
#include <numbers>

#include "superyolo/error.hpp"

namespace superyolo::train {

Sgd::Sgd(std::vector<nn::NamedParameter<float>> params, double momentum, double weight_decay, bool nesterov)
    : params_(std::move(params)), buffers_(params_.size()), momentum_(momentum), weight_decay_(weight_decay),
      nesterov_(nesterov) {
  if (momentum < 0 || weight_decay < 0) throw ConfigError("SGD momentum and weight decay must be >= 0");
}

void Sgd::step(double lr) {
  const float m = static_cast<float>(momentum_);
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& var = params_[i].var;
    if (!var.grad().defined()) continue;
    float* p = var.value().data();
    const float* g = var.grad().data();
    const int64_t n = var.value().numel();
    const float wd = params_[i].decay ? static_cast<float>(weight_decay_) : 0.0f;
    const bool first = !buffers_[i].defined();
    if (first) buffers_[i] = nn::Tensor<float>(var.value().shape());
    float* buf = buffers_[i].data();
    for (int64_t k = 0; k < n; ++k) {
      const float d = g[k] + wd * p[k];
      buf[k] = first ? d : m * buf[k] + d;
      const float upd = nesterov_ ? d + m * buf[k] : buf[k];
      p[k] -= static_cast<float>(lr) * upd;
    }
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

std::map<std::string, nn::Tensor<float>> Sgd::state() const {
  std::map<std::string, nn::Tensor<float>> out;
  for (size_t i = 0; i < params_.size(); ++i)
    if (buffers_[i].defined()) out.emplace(params_[i].name, buffers_[i]);
  return out;
}

void Sgd::load_state(const std::map<std::string, nn::Tensor<float>>& state) {
  for (size_t i = 0; i < params_.size(); ++i) {
    const auto it = state.find(params_[i].name);
    if (it == state.end()) {
      buffers_[i] = nn::Tensor<float>();
      continue;
    }
    if (it->second.shape() != params_[i].var.value().shape())
      throw ConfigError("optimizer state shape mismatch for '" + params_[i].name + "'");
    buffers_[i] = it->second;
  }
}

double learning_rate(int64_t step, int64_t total_steps, int64_t warmup_steps, double lr0, double lrf) {
  const double progress = total_steps > 0 ? std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps)) : 0.0;
  double lr = lr0 * (1.0 + (lrf - 1.0) * (1.0 - std::cos(std::numbers::pi * progress)) / 2.0);
  if (step < warmup_steps) lr *= static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  return lr;
}

}  // namespace superyolo::train
