/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "superyolo/error.hpp"

namespace superyolo::model {

int make_divisible(double channels, int divisor) {
  return static_cast<int>(std::ceil(channels / divisor)) * divisor;
}

int scaled_depth(int n, double depth_multiple) {
  return std::max(static_cast<int>(std::lround(n * depth_multiple)), 1);
}

void BackboneConfig::validate() const {
  if (!(depth_multiple > 0.0 && depth_multiple <= 1.33)) throw ConfigError("backbone.depth_multiple must lie in (0, 1.33]");
  if (!(width_multiple > 0.0 && width_multiple <= 1.33)) throw ConfigError("backbone.width_multiple must lie in (0, 1.33]");
  if (in_channels < 1) throw ConfigError("backbone.in_channels must be >= 1");
  if (n_layers < 1 || n_layers > 10) throw ConfigError("backbone.n_layers must lie in [1, 10]");
  if (tap_low < 0 || tap_high >= n_layers || tap_low >= tap_high)
    throw ConfigError("backbone taps must satisfy 0 <= tap_low < tap_high < n_layers (got " + std::to_string(tap_low) +
                      ", " + std::to_string(tap_high) + ")");
  if (spp_kernels.empty()) throw ConfigError("backbone.spp_kernels must not be empty");
  for (size_t i = 0; i < spp_kernels.size(); ++i) {
    if (spp_kernels[i] < 1 || spp_kernels[i] % 2 == 0) throw ConfigError("backbone.spp_kernels must be odd");
    if (i > 0 && spp_kernels[i] <= spp_kernels[i - 1]) throw ConfigError("backbone.spp_kernels must ascend");
  }
}

namespace {

const BackboneConfig& checked(const BackboneConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

template <typename T>
Backbone<T>::Backbone(const BackboneConfig& cfg, Rng& rng) : cfg_(checked(cfg)) {
  const double wm = cfg.width_multiple;
  const double dm = cfg.depth_multiple;
  int c_in = cfg.in_channels;
  int stride = 1;

  auto add = [&](std::unique_ptr<nn::Module<T>> module, std::function<Var<T>(const Var<T>&)> fn, std::string type,
                 int c_out, int s, int repeats) {
    const int index = static_cast<int>(layers_.size());
    stride *= s;
    this->register_module(std::to_string(index), *module);
    info_.push_back({index, std::move(type), c_in, c_out, stride, repeats, module->parameter_count()});
    layers_.push_back(std::move(module));
    forward_.push_back(std::move(fn));
    c_in = c_out;
  };
  auto cbs = [&](int base, int k, int s) {
    const int c_out = make_divisible(base * wm);
    auto m = std::make_unique<nn::Cbs<T>>(c_in, c_out, k, s, rng);
    auto* p = m.get();
    add(std::move(m), [p](const Var<T>& x) { return p->forward(x); }, "CBS " + std::to_string(k) + "x" + std::to_string(k),
        c_out, s, 1);
  };
  auto csp = [&](int base, int n, bool shortcut) {
    const int c_out = make_divisible(base * wm);
    const int reps = scaled_depth(n, dm);
    auto m = std::make_unique<nn::CspBlock<T>>(c_in, c_out, reps, shortcut, rng);
    auto* p = m.get();
    add(std::move(m), [p](const Var<T>& x) { return p->forward(x); }, shortcut ? "CSP" : "CSP (no shortcut)", c_out, 1,
        reps);
  };

  const int n = cfg.n_layers;
  if (cfg.use_focus) {
    const int c_out = cfg.stem_width();
    auto m = std::make_unique<nn::Focus<T>>(c_in, c_out, 3, rng);
    auto* p = m.get();
    add(std::move(m), [p](const Var<T>& x) { return p->forward(x); }, "Focus", c_out, 2, 1);
  } else {
    cbs(64, 3, 1);
  }
  if (n > 1) cbs(128, 3, 2);
  if (n > 2) csp(128, 3, true);
  if (n > 3) cbs(256, 3, 2);
  if (n > 4) csp(256, 9, true);
  if (n > 5) cbs(512, 3, 2);
  if (n > 6) csp(512, 9, true);
  if (n > 7) cbs(1024, 3, 2);
  if (n > 8) {
    const int c_out = make_divisible(1024 * wm);
    auto m = std::make_unique<nn::Spp<T>>(c_in, c_out, cfg.spp_kernels, rng);
    auto* p = m.get();
    add(std::move(m), [p](const Var<T>& x) { return p->forward(x); }, "SPP", c_out, 1, 1);
  }
  if (n > 9) csp(1024, 3, false);
}

template <typename T>
FeatureTaps<T> Backbone<T>::forward(const Var<T>& x) const {
  if (x.shape().c != cfg_.in_channels)
    throw ShapeError("backbone: expected " + std::to_string(cfg_.in_channels) + " input channels, got " +
                     std::to_string(x.shape().c));
  const int s = max_stride();
  if (x.shape().h % s != 0 || x.shape().w % s != 0)
    throw ShapeError("backbone: input extent " + std::to_string(x.shape().h) + "x" + std::to_string(x.shape().w) +
                     " is not a multiple of the stride " + std::to_string(s));
  FeatureTaps<T> taps;
  taps.stride_low = stride(cfg_.tap_low);
  taps.stride_high = stride(cfg_.tap_high);
  Var<T> y = x;
  for (size_t i = 0; i < forward_.size(); ++i) {
    y = forward_[i](y);
    const int idx = static_cast<int>(i);
    if (idx == cfg_.tap_low) taps.low_level = y;
    if (idx == cfg_.tap_high) taps.high_level = y;
    if (std::find(std::begin(kPyramidLayers), std::end(kPyramidLayers), idx) != std::end(kPyramidLayers))
      taps.pyramid.push_back(y);
  }
  return taps;
}

template class Backbone<float>;
template class Backbone<double>;

}  // namespace superyolo::model
