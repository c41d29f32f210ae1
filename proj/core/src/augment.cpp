/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/augment.hpp"

#include <algorithm>
#include <cmath>

#include "superyolo/error.hpp"
#include "superyolo/random.hpp"

namespace superyolo::data {

namespace {

constexpr double kMinArea = 1e-6;

// Inverse-mapped bilinear warp: out(u) = in((u - 0.5 - t) / s + 0.5) in
// normalized coordinates; samples falling outside the source get the fill.
Raster warp(const Raster& in, double s, double tx, double ty) {
  Raster out(in.channels, in.height, in.width, kFillValue);
  for (int y = 0; y < in.height; ++y) {
    const double v = ((y + 0.5) / in.height - 0.5 - ty) / s + 0.5;
    const double sy = v * in.height - 0.5;
    if (sy < -0.5 || sy > in.height - 0.5) continue;
    const double cy = std::clamp(sy, 0.0, in.height - 1.0);
    const int y0 = static_cast<int>(std::floor(cy));
    const int y1 = std::min(y0 + 1, in.height - 1);
    const float fy = static_cast<float>(cy - y0);
    for (int x = 0; x < in.width; ++x) {
      const double u = ((x + 0.5) / in.width - 0.5 - tx) / s + 0.5;
      const double sx = u * in.width - 0.5;
      if (sx < -0.5 || sx > in.width - 0.5) continue;
      const double cx = std::clamp(sx, 0.0, in.width - 1.0);
      const int x0 = static_cast<int>(std::floor(cx));
      const int x1 = std::min(x0 + 1, in.width - 1);
      const float fx = static_cast<float>(cx - x0);
      for (int c = 0; c < in.channels; ++c) {
        const float top = in.at(c, y0, x0) * (1 - fx) + in.at(c, y0, x1) * fx;
        const float bot = in.at(c, y1, x0) * (1 - fx) + in.at(c, y1, x1) * fx;
        out.at(c, y, x) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Raster mirror(const Raster& in) {
  Raster out(in.channels, in.height, in.width);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x) out.at(c, y, x) = in.at(c, y, in.width - 1 - x);
  return out;
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = mx > 0 ? d / mx : 0.0f;
  if (d <= 0) {
    h = 0;
  } else if (mx == r) {
    h = (g - b) / d / 6.0f;
  } else if (mx == g) {
    h = ((b - r) / d + 2.0f) / 6.0f;
  } else {
    h = ((r - g) / d + 4.0f) / 6.0f;
  }
  if (h < 0) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  const float h6 = h * 6.0f;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const float f = h6 - std::floor(h6);
  const float p = v * (1 - s);
  const float q = v * (1 - s * f);
  const float t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
}

void jitter_hsv(Raster& rgb, double gh, double gs, double gv) {
  const size_t plane = static_cast<size_t>(rgb.height) * rgb.width;
  float* r = rgb.pixels.data();
  float* g = r + plane;
  float* b = g + plane;
  for (size_t i = 0; i < plane; ++i) {
    float h, s, v;
    rgb_to_hsv(r[i], g[i], b[i], h, s, v);
    h = static_cast<float>(std::fmod(h * gh, 1.0));
    if (h < 0) h += 1.0f;
    s = std::clamp(static_cast<float>(s * gs), 0.0f, 1.0f);
    v = std::clamp(static_cast<float>(v * gv), 0.0f, 1.0f);
    hsv_to_rgb(h, s, v, r[i], g[i], b[i]);
  }
}

}  // namespace

void AugmentationConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("augment.") + name + " must lie in [0, 1]");
  };
  prob(flip_lr_prob, "flip_lr_prob");
  prob(mosaic_prob, "mosaic_prob");
  for (double g : hsv_gains)
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("augment.hsv_gains must lie in [0, 1]");
  if (!(translate_frac >= 0.0 && translate_frac < 1.0)) throw ConfigError("augment.translate_frac must lie in [0, 1)");
  if (!(scale_range[0] > 0.0 && scale_range[0] <= scale_range[1]))
    throw ConfigError("augment.scale_range must satisfy 0 < min <= max");
}

AugmentationConfig AugmentationConfig::disabled() {
  AugmentationConfig c;
  c.enabled = false;
  return c;
}

std::optional<BoundingBoxLabel> clip_label(int class_id, double x0, double y0, double x1, double y1) {
  x0 = std::clamp(x0, 0.0, 1.0);
  x1 = std::clamp(x1, 0.0, 1.0);
  y0 = std::clamp(y0, 0.0, 1.0);
  y1 = std::clamp(y1, 0.0, 1.0);
  const double w = x1 - x0;
  const double h = y1 - y0;
  if (w <= 0.0 || h <= 0.0 || w * h < kMinArea) return std::nullopt;
  return BoundingBoxLabel{class_id, (x0 + x1) / 2, (y0 + y1) / 2, w, h};
}

Sample flip_lr(const Sample& sample) {
  Sample out{{mirror(sample.pair.rgb), mirror(sample.pair.ir), sample.pair.id}, sample.labels};
  for (auto& l : out.labels) l.cx = 1.0 - l.cx;
  return out;
}

Sample apply_augmentations(const ImagePair& pair, const std::vector<BoundingBoxLabel>& labels,
                           const AugmentationConfig& cfg, uint64_t seed) {
  if (!cfg.enabled) return {pair, labels};
  cfg.validate();
  Rng rng(seed);
  const double s = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
  const double tx = rng.uniform(-cfg.translate_frac, cfg.translate_frac);
  const double ty = rng.uniform(-cfg.translate_frac, cfg.translate_frac);
  const double gh = 1.0 + rng.uniform(-1.0, 1.0) * cfg.hsv_gains[0];
  const double gs = 1.0 + rng.uniform(-1.0, 1.0) * cfg.hsv_gains[1];
  const double gv = 1.0 + rng.uniform(-1.0, 1.0) * cfg.hsv_gains[2];
  const bool flip = rng.bernoulli(cfg.flip_lr_prob);

  Sample out{pair, {}};
  if (s != 1.0 || tx != 0.0 || ty != 0.0) {
    out.pair.rgb = warp(pair.rgb, s, tx, ty);
    out.pair.ir = warp(pair.ir, s, tx, ty);
    for (const auto& l : labels) {
      auto map_x = [&](double x) { return (x - 0.5) * s + 0.5 + tx; };
      auto map_y = [&](double y) { return (y - 0.5) * s + 0.5 + ty; };
      if (auto c = clip_label(l.class_id, map_x(l.cx - l.w / 2), map_y(l.cy - l.h / 2), map_x(l.cx + l.w / 2),
                              map_y(l.cy + l.h / 2)))
        out.labels.push_back(*c);
    }
  } else {
    out.labels = labels;
  }
  if (gh != 1.0 || gs != 1.0 || gv != 1.0) jitter_hsv(out.pair.rgb, gh, gs, gv);
  if (flip) out = flip_lr(out);
  return out;
}

Sample mosaic4(const std::array<const Sample*, 4>& samples, uint64_t seed) {
  const int H = samples[0]->pair.height();
  const int W = samples[0]->pair.width();
  for (const Sample* s : samples)
    if (s->pair.height() != H || s->pair.width() != W) throw ShapeError("mosaic4: samples must share one extent");
  Rng rng(seed);
  const int xc = static_cast<int>(rng.integer(W / 4, 3 * W / 4));
  const int yc = static_cast<int>(rng.integer(H / 4, 3 * H / 4));

  Sample out{{Raster(3, H, W, kFillValue), Raster(1, H, W, kFillValue), samples[0]->pair.id + "+mosaic"}, {}};
  for (int k = 0; k < 4; ++k) {
    // Offset of the source image's origin on the canvas.
    const int ox = (k % 2 == 0) ? xc - W : xc;
    const int oy = (k < 2) ? yc - H : yc;
    const int cx0 = std::max(ox, 0), cx1 = std::min(ox + W, W);
    const int cy0 = std::max(oy, 0), cy1 = std::min(oy + H, H);
    const ImagePair& src = samples[k]->pair;
    for (int y = cy0; y < cy1; ++y)
      for (int x = cx0; x < cx1; ++x) {
        for (int c = 0; c < 3; ++c) out.pair.rgb.at(c, y, x) = src.rgb.at(c, y - oy, x - ox);
        out.pair.ir.at(0, y, x) = src.ir.at(0, y - oy, x - ox);
      }
    for (const auto& l : samples[k]->labels) {
      const double x0 = ((l.cx - l.w / 2) * W + ox) / W, x1 = ((l.cx + l.w / 2) * W + ox) / W;
      const double y0 = ((l.cy - l.h / 2) * H + oy) / H, y1 = ((l.cy + l.h / 2) * H + oy) / H;
      // Restrict to the quadrant the image actually occupies.
      const double qx0 = static_cast<double>(cx0) / W, qx1 = static_cast<double>(cx1) / W;
      const double qy0 = static_cast<double>(cy0) / H, qy1 = static_cast<double>(cy1) / H;
      if (auto c = clip_label(l.class_id, std::max(x0, qx0), std::max(y0, qy0), std::min(x1, qx1), std::min(y1, qy1)))
        out.labels.push_back(*c);
    }
  }
  return out;
}

}  // namespace superyolo::data
