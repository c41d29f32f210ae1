/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "superyolo/labels.hpp"
#include "superyolo/raster.hpp"

namespace superyolo::data {

/// An image pair with its labels.
struct Sample {
  ImagePair pair;
  std::vector<BoundingBoxLabel> labels;
};

struct AugmentationConfig {
  std::array<double, 3> hsv_gains{0.015, 0.7, 0.4};  ///< hue, saturation, value
  double flip_lr_prob = 0.5;
  double translate_frac = 0.1;
  std::array<double, 2> scale_range{0.5, 1.5};
  double mosaic_prob = 1.0;
  bool enabled = true;

  /// Throws ConfigError when a probability leaves [0, 1], a gain or the
  /// translation is negative, or the scale range is empty or non-positive.
  void validate() const;

  static AugmentationConfig disabled();
};

/// Border value for areas uncovered by geometric transforms.
inline constexpr float kFillValue = 114.0f / 255.0f;

/// Per-image pipeline: random scale about the image centre with translation,
/// HSV jitter (RGB only), then left-right flip. Geometric changes apply to
/// RGB, IR and labels alike; boxes are clipped to [0, 1] and dropped when
/// their clipped area falls below 1e-6. Returns the input unchanged when
/// `cfg.enabled` is false.
Sample apply_augmentations(const ImagePair& pair, const std::vector<BoundingBoxLabel>& labels,
                           const AugmentationConfig& cfg, uint64_t seed);

/// Four-image mosaic on a canvas of the first sample's size. The shared
/// corner is jittered uniformly inside the central half of the canvas; each
/// sample contributes the part of itself adjacent to that corner.
Sample mosaic4(const std::array<const Sample*, 4>& samples, uint64_t seed);

/// Mirror images horizontally and map cx -> 1 - cx.
Sample flip_lr(const Sample& sample);

/// Clip a label to [0, 1]; nullopt when the clipped area is below 1e-6.
std::optional<BoundingBoxLabel> clip_label(int class_id, double x0, double y0, double x1, double y1);

}  // namespace superyolo::data
