/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/raster.hpp"

#include <algorithm>
#include <cmath>

#include "superyolo/error.hpp"

namespace superyolo::data {

Raster normalize(const IntRaster& image) {
  if (image.max_value <= 0) throw RangeError("normalize: max_value must be positive");
  Raster out(image.channels, image.height, image.width);
  if (out.pixels.size() != image.pixels.size()) throw ShapeError("normalize: pixel count does not match extent");
  const float inv = 1.0f / static_cast<float>(image.max_value);
  for (size_t i = 0; i < image.pixels.size(); ++i) {
    const int32_t v = image.pixels[i];
    if (v < 0 || v > image.max_value)
      throw RangeError("normalize: value " + std::to_string(v) + " outside [0, " +
                       std::to_string(image.max_value) + "] at index " + std::to_string(i));
    out.pixels[i] = image.max_value == 255 ? static_cast<float>(v) / 255.0f : static_cast<float>(v) * inv;
  }
  return out;
}

Raster bilinear_resize(const Raster& image, int out_height, int out_width) {
  if (out_height <= 0 || out_width <= 0) throw ShapeError("bilinear_resize: empty output");
  if (out_height == image.height && out_width == image.width) return image;
  Raster out(image.channels, out_height, out_width);
  const double sy = static_cast<double>(image.height) / out_height;
  const double sx = static_cast<double>(image.width) / out_width;

  struct Tap {
    int i0, i1;
    float frac;
  };
  auto taps = [](int count, double step, int limit) {
    std::vector<Tap> t(static_cast<size_t>(count));
    for (int d = 0; d < count; ++d) {
      double src = (d + 0.5) * step - 0.5;
      if (src < 0.0) src = 0.0;
      int i0 = static_cast<int>(std::floor(src));
      if (i0 > limit - 1) i0 = limit - 1;
      const int i1 = std::min(i0 + 1, limit - 1);
      t[d] = {i0, i1, static_cast<float>(src - i0)};
    }
    return t;
  };
  const auto ty = taps(out_height, sy, image.height);
  const auto tx = taps(out_width, sx, image.width);
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < out_height; ++y) {
      const Tap& a = ty[y];
      for (int x = 0; x < out_width; ++x) {
        const Tap& b = tx[x];
        const float top = image.at(c, a.i0, b.i0) * (1.0f - b.frac) + image.at(c, a.i0, b.i1) * b.frac;
        const float bot = image.at(c, a.i1, b.i0) * (1.0f - b.frac) + image.at(c, a.i1, b.i1) * b.frac;
        out.at(c, y, x) = top * (1.0f - a.frac) + bot * a.frac;
      }
    }
  return out;
}

Raster bilinear_downsample(const Raster& image, int n) {
  if (n < 1) throw RangeError("bilinear_downsample: factor must be >= 1");
  if (image.height % n != 0 || image.width % n != 0)
    throw ShapeError("bilinear_downsample: factor " + std::to_string(n) + " does not divide " +
                     std::to_string(image.height) + "x" + std::to_string(image.width));
  if (n == 1) return image;
  return bilinear_resize(image, image.height / n, image.width / n);
}

LrPair make_lr_pair(const ImagePair& pair, int n) {
  return {bilinear_downsample(pair.rgb, n), bilinear_downsample(pair.ir, n), n};
}

void validate_pair(const ImagePair& pair, int n) {
  if (pair.rgb.channels != 3) throw ShapeError("image pair '" + pair.id + "': rgb must have 3 channels");
  if (pair.ir.channels != 1) throw ShapeError("image pair '" + pair.id + "': ir must have 1 channel");
  if (!pair.rgb.same_extent(pair.ir)) throw ShapeError("image pair '" + pair.id + "': rgb/ir extents differ");
  if (pair.height() % 32 != 0 || pair.width() % 32 != 0)
    throw ShapeError("image pair '" + pair.id + "': extents must be multiples of 32");
  if (n < 1 || pair.height() % n != 0 || pair.width() % n != 0)
    throw ShapeError("image pair '" + pair.id + "': downsample factor must divide extents");
}

}  // namespace superyolo::data
