/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>

#include "superyolo/augment.hpp"
#include "superyolo/dataset.hpp"

namespace superyolo::data {

struct SyntheticConfig {
  uint64_t seed = 0;
  int n_images = 8;
  int image_size = 256;
  int n_classes = 3;
  int max_objects = 4;
  /// Object extent as a fraction of the image side.
  double min_object = 0.10;
  double max_object = 0.20;

  void validate() const;
};

/// Renders image `index` of the synthetic set. Each class has its own shape,
/// RGB colour and IR intensity; the IR channel is bright where the RGB
/// object is dark and vice versa. Pixel values are multiples of 1/255 so the
/// in-memory sample equals what `generate_synthetic_dataset` writes.
Sample render_synthetic_sample(const SyntheticConfig& cfg, int index);

/// Writes rgb/<id>.png, ir/<id>.png, labels/<id>.txt and manifest.json into
/// `out_dir`. Output is byte-identical for a fixed config.
Manifest generate_synthetic_dataset(const SyntheticConfig& cfg, const std::string& out_dir);

}  // namespace superyolo::data
