/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <memory>
#include <vector>

#include "superyolo/backbone.hpp"

namespace superyolo::model {

/// Anchor size in input pixels.
struct Anchor {
  double w = 0;
  double h = 0;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

inline constexpr int kAnchorsPerDetector = 3;

struct HeadConfig {
  int n_detectors = 1;
  int n_classes = 8;
  /// 3 anchors per detector, detectors ordered by ascending stride.
  std::vector<Anchor> anchors;
  /// Per-detector strides; filled from the backbone layer table.
  std::vector<int> strides;
  double conf_threshold = 0.001;
  double nms_iou_threshold = 0.6;
  int max_detections = 300;

  int outputs_per_anchor() const { return 5 + n_classes; }
  /// Anchors of detector `l` divided by its stride.
  std::array<Anchor, kAnchorsPerDetector> grid_anchors(int l) const;
  void validate() const;
};

/// Anchors of the reference family at strides 8/16/32 (first 3 for the
/// one-detector head).
std::vector<Anchor> default_anchors(int n_detectors);

/// Feature-pyramid neck and detection convolutions. Layers 10-17 build the
/// top-down path ending at the finest scale; with three detectors layers
/// 18-23 add the bottom-up path. Each detector is a biased 1x1 convolution
/// emitting anchors x (5 + classes) channels.
template <typename T>
class YoloHead : public nn::Module<T> {
 public:
  YoloHead(const HeadConfig& cfg, const BackboneConfig& backbone, const std::array<int, 3>& pyramid_channels, Rng& rng);

  /// Raw grids [N, 3 * (5 + classes), H_l, W_l], one per detector.
  std::vector<Var<T>> forward(const std::vector<Var<T>>& pyramid) const;

  const HeadConfig& config() const { return cfg_; }
  nn::Conv2d<T>& detector(int l) { return *detect_.at(l); }

 private:
  HeadConfig cfg_;
  std::unique_ptr<nn::Cbs<T>> l10_, l14_, l18_, l21_;
  std::unique_ptr<nn::CspBlock<T>> l13_, l17_, l20_, l23_;
  std::vector<std::unique_ptr<nn::Conv2d<T>>> detect_;
};

extern template class YoloHead<float>;
extern template class YoloHead<double>;

}  // namespace superyolo::model
