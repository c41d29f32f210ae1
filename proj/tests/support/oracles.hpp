/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <vector>

#include "superyolo/detection_metrics.hpp"
#include "superyolo/postprocess.hpp"
#include "superyolo/random.hpp"
#include "superyolo/raster.hpp"

namespace superyolo::testing {

using model::Box;
using model::Detection;
using model::DetectionList;

inline Box random_box(Rng& rng, double extent = 80, double min_side = 5, double max_side = 40) {
  const double x = rng.uniform(0, extent), y = rng.uniform(0, extent);
  return {x, y, x + rng.uniform(min_side, max_side), y + rng.uniform(min_side, max_side)};
}

/// Suppression by exhaustive comparison: visit boxes by descending score and
/// keep a box unless some already kept box of its class overlaps it by more
/// than the threshold.
inline DetectionList nms_brute_force(DetectionList dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  DetectionList kept;
  for (const auto& d : dets) {
    bool ok = true;
    for (const auto& k : kept)
      if (k.class_id == d.class_id && model::iou(k.box(), d.box()) > iou_threshold) ok = false;
    if (ok) kept.push_back(d);
  }
  return kept;
}

/// Random NMS instance with at most `max_boxes` boxes over 3 classes.
inline DetectionList random_nms_instance(Rng& rng, int max_boxes = 20) {
  DetectionList dets;
  const int n = static_cast<int>(rng.integer(0, max_boxes));
  for (int i = 0; i < n; ++i) {
    const Box b = random_box(rng);
    dets.push_back({static_cast<int>(rng.integer(0, 2)), rng.uniform(0.01, 1.0), b.x1, b.y1, b.x2, b.y2});
  }
  return dets;
}

/// Enumeration oracle for 101-point AP: rank every detection of the class,
/// mark true positives by scanning ground truth per image, then for each
/// recall level take the best precision over all ranking prefixes reaching it.
inline double ap_oracle(const std::vector<DetectionList>& dets, const std::vector<std::vector<metrics::GroundTruth>>& gts,
                        int cls, double thr) {
  struct Item {
    double score;
    size_t image;
    Box box;
  };
  std::vector<Item> all;
  int n_gt = 0;
  for (size_t i = 0; i < dets.size(); ++i) {
    for (const auto& d : dets[i])
      if (d.class_id == cls) all.push_back({d.score, i, d.box()});
    for (const auto& g : gts[i]) n_gt += g.class_id == cls;
  }
  if (n_gt == 0) return 0.0;
  std::stable_sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score > b.score; });
  std::vector<std::vector<char>> used(gts.size());
  for (size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].size(), 0);
  std::vector<double> rec, prec;
  int tp = 0;
  for (size_t k = 0; k < all.size(); ++k) {
    const auto& it = all[k];
    int best = -1;
    double best_iou = -1;
    for (size_t g = 0; g < gts[it.image].size(); ++g) {
      if (gts[it.image][g].class_id != cls || used[it.image][g]) continue;
      const double v = model::iou(it.box, gts[it.image][g].box);
      if (v > best_iou) best_iou = v, best = static_cast<int>(g);
    }
    if (best >= 0 && best_iou >= thr) used[it.image][best] = 1, ++tp;
    rec.push_back(static_cast<double>(tp) / n_gt);
    prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0;
    for (size_t k = 0; k < rec.size(); ++k)
      if (rec[k] >= r / 100.0 - 1e-12) best = std::max(best, prec[k]);
    sum += best;
  }
  return sum / 101;
}

struct ApFixture {
  std::vector<DetectionList> dets;
  std::vector<std::vector<metrics::GroundTruth>> gts;
};

/// 1-4 images over 2 classes; most objects get a jittered detection and
/// random false positives are mixed in.
inline ApFixture random_ap_fixture(Rng& rng) {
  ApFixture f;
  const int images = static_cast<int>(rng.integer(1, 4));
  f.dets.resize(images);
  f.gts.resize(images);
  for (int i = 0; i < images; ++i) {
    const int n_gt = static_cast<int>(rng.integer(0, 5));
    for (int g = 0; g < n_gt; ++g) {
      f.gts[i].push_back({static_cast<int>(rng.integer(0, 1)), random_box(rng, 60, 8, 30)});
      if (rng.bernoulli(0.7)) {
        const Box& t = f.gts[i].back().box;
        const double j = 6;
        f.dets[i].push_back({f.gts[i].back().class_id, rng.uniform(), t.x1 + rng.uniform(-j, j),
                             t.y1 + rng.uniform(-j, j), t.x2 + rng.uniform(-j, j), t.y2 + rng.uniform(-j, j)});
      }
    }
    const int n_fp = static_cast<int>(rng.integer(0, 4));
    for (int k = 0; k < n_fp; ++k) {
      const Box b = random_box(rng, 60, 8, 30);
      f.dets[i].push_back({static_cast<int>(rng.integer(0, 1)), rng.uniform(), b.x1, b.y1, b.x2, b.y2});
    }
  }
  return f;
}

/// Half-pixel-centre bilinear sample of output pixel (oy, ox) at factor n,
/// evaluated from the four neighbouring source pixels.
inline double bilinear_oracle(const data::Raster& img, int c, int oy, int ox, int n) {
  auto coord = [&](int d, int limit) { return std::clamp((d + 0.5) * n - 0.5, 0.0, static_cast<double>(limit - 1)); };
  const double sy = coord(oy, img.height), sx = coord(ox, img.width);
  const int y0 = static_cast<int>(sy), x0 = static_cast<int>(sx);
  const int y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
  const double fy = sy - y0, fx = sx - x0;
  return (1 - fy) * ((1 - fx) * img.at(c, y0, x0) + fx * img.at(c, y0, x1)) +
         fy * ((1 - fx) * img.at(c, y1, x0) + fx * img.at(c, y1, x1));
}

/// Largest deviation of bilinear_downsample from the oracle on random images
/// for factors 2, 4 and 8.
inline double downsample_oracle_error(Rng& rng) {
  double worst = 0;
  for (int n : {2, 4, 8}) {
    data::Raster img(3, 8 * n, 4 * n);
    for (auto& v : img.pixels) v = static_cast<float>(rng.uniform());
    const data::Raster out = data::bilinear_downsample(img, n);
    if (out.height != 8 || out.width != 4) return 1e300;
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 4; ++x)
          worst = std::max(worst, std::abs(out.at(c, y, x) - bilinear_oracle(img, c, y, x, n)));
  }
  return worst;
}

}  // namespace superyolo::testing
