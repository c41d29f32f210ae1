/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace superyolo::data {

/// Planar float image, channel-major ([c][y][x]).
struct Raster {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  Raster() = default;
  Raster(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w), pixels(static_cast<size_t>(c) * h * w, fill) {}

  float& at(int c, int y, int x) { return pixels[(static_cast<size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const { return pixels[(static_cast<size_t>(c) * height + y) * width + x]; }
  bool same_extent(const Raster& o) const { return height == o.height && width == o.width; }
  friend bool operator==(const Raster&, const Raster&) = default;
};

/// Unnormalized integer image as decoded from disk (8- or 16-bit).
struct IntRaster {
  int channels = 0;
  int height = 0;
  int width = 0;
  int max_value = 255;  ///< 255 for 8-bit sources, 65535 for 16-bit
  std::vector<int32_t> pixels;
};

/// Aligned RGB (3 channels) and IR (1 channel) rasters in [0, 1].
struct ImagePair {
  Raster rgb;
  Raster ir;
  std::string id;

  int height() const { return rgb.height; }
  int width() const { return rgb.width; }
  friend bool operator==(const ImagePair&, const ImagePair&) = default;
};

/// Bilinearly downsampled copy of an ImagePair.
struct LrPair {
  Raster rgb_lr;
  Raster ir_lr;
  int scale_n = 1;
};

/// Divides by the source maximum (255 for 8-bit). Throws RangeError when a
/// value lies outside [0, max_value].
Raster normalize(const IntRaster& image);

/// Half-pixel-centre bilinear resampling (no corner alignment):
/// src = (dst + 0.5) * in / out - 0.5, clamped to the valid range.
Raster bilinear_resize(const Raster& image, int out_height, int out_width);

/// D(x): n-times bilinear downsampling. n must divide both extents; n = 1
/// returns an exact copy.
Raster bilinear_downsample(const Raster& image, int n);

/// Downsamples both modalities of `pair` by `n`.
LrPair make_lr_pair(const ImagePair& pair, int n);

/// Throws unless rgb is 3-channel, ir 1-channel, extents agree, and both are
/// divisible by 32 and by `n`.
void validate_pair(const ImagePair& pair, int n);

}  // namespace superyolo::data
