/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/head.hpp"

#include <cmath>

#include "superyolo/error.hpp"
#include "superyolo/ops.hpp"

namespace superyolo::model {

std::array<Anchor, kAnchorsPerDetector> HeadConfig::grid_anchors(int l) const {
  std::array<Anchor, kAnchorsPerDetector> out;
  for (int a = 0; a < kAnchorsPerDetector; ++a) {
    const Anchor& src = anchors.at(static_cast<size_t>(l * kAnchorsPerDetector + a));
    out[a] = {src.w / strides.at(l), src.h / strides.at(l)};
  }
  return out;
}

void HeadConfig::validate() const {
  if (n_detectors != 1 && n_detectors != 3) throw ConfigError("head.n_detectors must be 1 or 3");
  if (n_classes < 1) throw ConfigError("head.n_classes must be >= 1");
  if (static_cast<int>(anchors.size()) != n_detectors * kAnchorsPerDetector)
    throw ConfigError("head.anchors must hold " + std::to_string(n_detectors * kAnchorsPerDetector) + " (w, h) pairs");
  for (const auto& a : anchors)
    if (!(a.w > 0 && a.h > 0)) throw ConfigError("head.anchors must be positive");
  if (!strides.empty() && static_cast<int>(strides.size()) != n_detectors)
    throw ConfigError("head.strides must list one stride per detector");
  if (!(conf_threshold > 0 && conf_threshold < 1)) throw ConfigError("head.conf_threshold must lie in (0, 1)");
  if (!(nms_iou_threshold > 0 && nms_iou_threshold < 1)) throw ConfigError("head.nms_iou_threshold must lie in (0, 1)");
  if (max_detections < 1) throw ConfigError("head.max_detections must be >= 1");
}

std::vector<Anchor> default_anchors(int n_detectors) {
  static const std::vector<Anchor> all{{10, 13}, {16, 30},  {33, 23},  {30, 61},  {62, 45},
                                       {59, 119}, {116, 90}, {156, 198}, {373, 326}};
  return {all.begin(), all.begin() + n_detectors * kAnchorsPerDetector};
}

namespace {

const HeadConfig& checked(const HeadConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

template <typename T>
YoloHead<T>::YoloHead(const HeadConfig& cfg, const BackboneConfig& bb, const std::array<int, 3>& pyr, Rng& rng)
    : cfg_(checked(cfg)) {
  if (static_cast<int>(cfg_.strides.size()) != cfg_.n_detectors) throw ConfigError("head strides are not set");
  const double wm = bb.width_multiple;
  const int n = scaled_depth(3, bb.depth_multiple);
  const int c256 = make_divisible(256 * wm), c512 = make_divisible(512 * wm), c1024 = make_divisible(1024 * wm);

  l10_ = std::make_unique<nn::Cbs<T>>(pyr[2], c512, 1, 1, rng);
  l13_ = std::make_unique<nn::CspBlock<T>>(c512 + pyr[1], c512, n, false, rng);
  l14_ = std::make_unique<nn::Cbs<T>>(c512, c256, 1, 1, rng);
  l17_ = std::make_unique<nn::CspBlock<T>>(c256 + pyr[0], c256, n, false, rng);
  this->register_module("10", *l10_);
  this->register_module("13", *l13_);
  this->register_module("14", *l14_);
  this->register_module("17", *l17_);
  std::vector<int> detect_in{c256};
  if (cfg_.n_detectors == 3) {
    l18_ = std::make_unique<nn::Cbs<T>>(c256, c256, 3, 2, rng);
    l20_ = std::make_unique<nn::CspBlock<T>>(c256 + c256, c512, n, false, rng);
    l21_ = std::make_unique<nn::Cbs<T>>(c512, c512, 3, 2, rng);
    l23_ = std::make_unique<nn::CspBlock<T>>(c512 + c512, c1024, n, false, rng);
    this->register_module("18", *l18_);
    this->register_module("20", *l20_);
    this->register_module("21", *l21_);
    this->register_module("23", *l23_);
    detect_in = {c256, c512, c1024};
  }
  const int no = cfg_.outputs_per_anchor();
  for (int l = 0; l < cfg_.n_detectors; ++l) {
    detect_.push_back(std::make_unique<nn::Conv2d<T>>(detect_in[l], kAnchorsPerDetector * no, 1, 1, 0, true, rng));
    this->register_module("detect." + std::to_string(l), *detect_.back());
    // Objectness prior of ~8 objects per 640x640 image, class prior 0.6/nc.
    Tensor<T>& bias = detect_.back()->bias().value();
    const double s = cfg_.strides[l];
    for (int a = 0; a < kAnchorsPerDetector; ++a) {
      bias.data()[a * no + 4] += static_cast<T>(std::log(8.0 / ((640.0 / s) * (640.0 / s))));
      for (int c = 0; c < cfg_.n_classes; ++c)
        bias.data()[a * no + 5 + c] += static_cast<T>(std::log(0.6 / (cfg_.n_classes - 0.99)));
    }
  }
}

template <typename T>
std::vector<Var<T>> YoloHead<T>::forward(const std::vector<Var<T>>& pyramid) const {
  if (pyramid.size() != 3) throw ShapeError("head: expected 3 pyramid features");
  const Var<T> x10 = l10_->forward(pyramid[2]);
  const Var<T> x13 = l13_->forward(nn::concat<T>({nn::upsample_nearest(x10, 2), pyramid[1]}));
  const Var<T> x14 = l14_->forward(x13);
  const Var<T> x17 = l17_->forward(nn::concat<T>({nn::upsample_nearest(x14, 2), pyramid[0]}));
  std::vector<Var<T>> features{x17};
  if (cfg_.n_detectors == 3) {
    const Var<T> x20 = l20_->forward(nn::concat<T>({l18_->forward(x17), x14}));
    const Var<T> x23 = l23_->forward(nn::concat<T>({l21_->forward(x20), x10}));
    features.push_back(x20);
    features.push_back(x23);
  }
  std::vector<Var<T>> raw;
  for (size_t l = 0; l < features.size(); ++l) raw.push_back(detect_[l]->forward(features[l]));
  return raw;
}

template class YoloHead<float>;
template class YoloHead<double>;

}  // namespace superyolo::model
