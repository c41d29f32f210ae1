/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "superyolo/error.hpp"
#include "superyolo/image_io.hpp"
#include "superyolo/random.hpp"

namespace fs = std::filesystem;

namespace superyolo::data {

namespace {

enum class Shape { kSquare, kDisk, kTriangle, kRing, kPlus, kDiamond, kFrame, kHourglass };
constexpr int kShapes = 8;

// u, v in [-1, 1] relative to the object box.
bool inside(Shape shape, double u, double v) {
  switch (shape) {
    case Shape::kSquare: return true;
    case Shape::kDisk: return u * u + v * v <= 1.0;
    case Shape::kTriangle: return std::abs(u) <= (v + 1.0) / 2.0;
    case Shape::kRing: {
      const double r = u * u + v * v;
      return r <= 1.0 && r >= 0.3;
    }
    case Shape::kPlus: return std::abs(u) <= 0.35 || std::abs(v) <= 0.35;
    case Shape::kDiamond: return std::abs(u) + std::abs(v) <= 1.0;
    case Shape::kFrame: return std::max(std::abs(u), std::abs(v)) >= 0.55;
    case Shape::kHourglass: return std::abs(u) <= std::abs(v) + 0.1;
  }
  return false;
}

struct Palette {
  float r, g, b, ir;
};

Palette class_palette(int cls, int n_classes) {
  static const float colors[kShapes][3] = {{0.90f, 0.15f, 0.15f}, {0.15f, 0.80f, 0.20f}, {0.20f, 0.30f, 0.95f},
                                           {0.95f, 0.85f, 0.10f}, {0.85f, 0.20f, 0.85f}, {0.10f, 0.85f, 0.85f},
                                           {0.98f, 0.55f, 0.10f}, {0.55f, 0.35f, 0.15f}};
  const float* c = colors[cls % kShapes];
  const float luminance = 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2];
  // Complementary thermal contrast, spread so classes differ in IR as well.
  const float spread = n_classes > 1 ? static_cast<float>(cls) / static_cast<float>(n_classes - 1) : 0.0f;
  const float ir = std::clamp(1.05f - luminance * 0.6f - 0.25f * spread, 0.05f, 1.0f);
  return {c[0], c[1], c[2], ir};
}

float quantize(double v) { return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f; }

}  // namespace

void SyntheticConfig::validate() const {
  if (n_images < 0) throw ConfigError("synthetic: n_images must be >= 0");
  if (image_size <= 0 || image_size % 32 != 0) throw ConfigError("synthetic: image_size must be a positive multiple of 32");
  if (n_classes < 1) throw ConfigError("synthetic: n_classes must be >= 1");
  if (max_objects < 1) throw ConfigError("synthetic: max_objects must be >= 1");
  if (!(min_object > 0.0 && min_object <= max_object && max_object < 1.0))
    throw ConfigError("synthetic: object size range must satisfy 0 < min <= max < 1");
}

Sample render_synthetic_sample(const SyntheticConfig& cfg, int index) {
  cfg.validate();
  const int S = cfg.image_size;
  Rng rng(Rng::derive(cfg.seed, static_cast<uint64_t>(index)));
  char id[32];
  std::snprintf(id, sizeof id, "syn%05d", index);

  // Smooth background gradients, different per modality.
  const double base_rgb[3] = {rng.uniform(0.25, 0.45), rng.uniform(0.25, 0.45), rng.uniform(0.25, 0.45)};
  const double base_ir = rng.uniform(0.15, 0.3);
  const double gx = rng.uniform(-0.1, 0.1), gy = rng.uniform(-0.1, 0.1);
  std::vector<double> rgb_bg(static_cast<size_t>(3) * S * S), ir_bg(static_cast<size_t>(S) * S);
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x) {
      const double ramp = gx * x / S + gy * y / S;
      for (int c = 0; c < 3; ++c)
        rgb_bg[(static_cast<size_t>(c) * S + y) * S + x] = base_rgb[c] + ramp + rng.uniform(-0.03, 0.03);
      ir_bg[static_cast<size_t>(y) * S + x] = base_ir - ramp + rng.uniform(-0.03, 0.03);
    }

  struct Placed {
    int cls, x0, y0, x1, y1;
  };
  std::vector<Placed> placed;
  const int n_objects = static_cast<int>(rng.integer(1, cfg.max_objects));
  for (int attempt = 0; attempt < 100 && static_cast<int>(placed.size()) < n_objects; ++attempt) {
    const int bw = std::max(4, static_cast<int>(std::lround(rng.uniform(cfg.min_object, cfg.max_object) * S)));
    const int bh = std::max(4, static_cast<int>(std::lround(rng.uniform(cfg.min_object, cfg.max_object) * S)));
    const int x0 = static_cast<int>(rng.integer(1, S - bw - 1));
    const int y0 = static_cast<int>(rng.integer(1, S - bh - 1));
    const int cls = static_cast<int>(rng.integer(0, cfg.n_classes - 1));
    const int gap = 2;
    const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](const Placed& p) {
      return x0 < p.x1 + gap && p.x0 < x0 + bw + gap && y0 < p.y1 + gap && p.y0 < y0 + bh + gap;
    });
    if (!overlaps) placed.push_back({cls, x0, y0, x0 + bw, y0 + bh});
  }

  Sample sample{{Raster(3, S, S), Raster(1, S, S), id}, {}};
  for (const Placed& p : placed) {
    const Shape shape = static_cast<Shape>(p.cls % kShapes);
    const Palette col = class_palette(p.cls, cfg.n_classes);
    int mx0 = S, my0 = S, mx1 = -1, my1 = -1;
    for (int y = p.y0; y < p.y1; ++y)
      for (int x = p.x0; x < p.x1; ++x) {
        const double u = 2.0 * (x + 0.5 - p.x0) / (p.x1 - p.x0) - 1.0;
        const double v = 2.0 * (y + 0.5 - p.y0) / (p.y1 - p.y0) - 1.0;
        if (!inside(shape, u, v)) continue;
        const size_t i = static_cast<size_t>(y) * S + x;
        rgb_bg[i] = col.r;
        rgb_bg[static_cast<size_t>(S) * S + i] = col.g;
        rgb_bg[2 * static_cast<size_t>(S) * S + i] = col.b;
        ir_bg[i] = col.ir;
        mx0 = std::min(mx0, x), my0 = std::min(my0, y), mx1 = std::max(mx1, x), my1 = std::max(my1, y);
      }
    if (mx1 < 0) continue;
    sample.labels.push_back({p.cls, (mx0 + mx1 + 1) / (2.0 * S), (my0 + my1 + 1) / (2.0 * S),
                             static_cast<double>(mx1 + 1 - mx0) / S, static_cast<double>(my1 + 1 - my0) / S});
  }
  for (size_t i = 0; i < rgb_bg.size(); ++i) sample.pair.rgb.pixels[i] = quantize(rgb_bg[i]);
  for (size_t i = 0; i < ir_bg.size(); ++i) sample.pair.ir.pixels[i] = quantize(ir_bg[i]);
  return sample;
}

Manifest generate_synthetic_dataset(const SyntheticConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::error_code ec;
  for (const char* sub : {"rgb", "ir", "labels"}) {
    fs::create_directories(fs::path(out_dir) / sub, ec);
    if (ec) throw IoError("cannot create '" + (fs::path(out_dir) / sub).string() + "': " + ec.message());
  }
  Manifest manifest;
  for (int k = 0; k < cfg.n_classes; ++k) manifest.class_names.push_back("class" + std::to_string(k));
  for (int i = 0; i < cfg.n_images; ++i) {
    const Sample s = render_synthetic_sample(cfg, i);
    const std::string rgb = "rgb/" + s.pair.id + ".png";
    const std::string ir = "ir/" + s.pair.id + ".png";
    const std::string labels = "labels/" + s.pair.id + ".txt";
    write_png((fs::path(out_dir) / rgb).string(), s.pair.rgb);
    write_png((fs::path(out_dir) / ir).string(), s.pair.ir);
    write_label_file((fs::path(out_dir) / labels).string(), s.labels);
    manifest.entries.push_back({s.pair.id, rgb, ir, labels, "train"});
  }
  save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
  manifest.root = fs::absolute(out_dir).string();
  return manifest;
}

}  // namespace superyolo::data
