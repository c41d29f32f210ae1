/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "superyolo/layers.hpp"

namespace superyolo::model {

using nn::Shape;
using nn::Tensor;
using nn::Var;

/// Rounds channels up to a multiple of `divisor`.
int make_divisible(double channels, int divisor = 8);
/// Bottleneck repeats after depth scaling: max(round(n * depth), 1).
int scaled_depth(int n, double depth_multiple);

struct BackboneConfig {
  double depth_multiple = 0.33;
  double width_multiple = 0.5;
  bool use_focus = false;
  int in_channels = 32;
  std::vector<int> spp_kernels{5, 9, 13};
  int tap_low = 4;   ///< 0-based layer index
  int tap_high = 9;
  int n_layers = 10;  ///< truncation of the 10-layer table (for small fixtures)

  int stem_width() const { return make_divisible(64 * width_multiple); }
  void validate() const;
};

/// Audit row of the layer table.
struct LayerInfo {
  int index;
  std::string type;
  int in_channels;
  int out_channels;
  int stride;  ///< cumulative stride of the layer output
  int repeats;
  int64_t params;
};

template <typename T>
struct FeatureTaps {
  Var<T> low_level;
  Var<T> high_level;
  std::vector<Var<T>> pyramid;  ///< outputs of layers 4, 6 and 9 (when built)
  int stride_low = 0;
  int stride_high = 0;
};

/// CSP backbone:
///   0 stem (3x3 CBS stride 1, or Focus) | 1 CBS s2 | 2 CSP | 3 CBS s2 | 4 CSP
///   5 CBS s2 | 6 CSP | 7 CBS s2 | 8 SPP | 9 CSP (no shortcut)
/// Base widths 64,128,128,256,256,512,512,1024,1024,1024 and CSP depths
/// 3,9,9,3 are scaled by the width and depth multiples.
template <typename T>
class Backbone : public nn::Module<T> {
 public:
  Backbone(const BackboneConfig& cfg, Rng& rng);

  FeatureTaps<T> forward(const Var<T>& x) const;

  const BackboneConfig& config() const { return cfg_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  int channels(int layer) const { return info_.at(layer).out_channels; }
  int stride(int layer) const { return info_.at(layer).stride; }
  /// Largest stride among built layers; input extents must be multiples.
  int max_stride() const { return info_.back().stride; }
  std::vector<LayerInfo> layer_table() const { return info_; }

  static constexpr int kPyramidLayers[3] = {4, 6, 9};

 private:
  BackboneConfig cfg_;
  std::vector<std::unique_ptr<nn::Module<T>>> layers_;
  std::vector<std::function<Var<T>(const Var<T>&)>> forward_;
  std::vector<LayerInfo> info_;
};

extern template class Backbone<float>;
extern template class Backbone<double>;

}  // namespace superyolo::model
