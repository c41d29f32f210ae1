/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/anchors.hpp"

#include <algorithm>
#include <numeric>

#include "superyolo/error.hpp"

namespace superyolo::model {

namespace {

double wh_iou(const Anchor& a, const Anchor& b) {
  const double inter = std::min(a.w, b.w) * std::min(a.h, b.h);
  return inter / (a.w * a.h + b.w * b.h - inter);
}

}  // namespace

std::vector<Anchor> kmeans_anchors(const std::vector<Anchor>& sizes, int k, int iterations) {
  if (k < 1) throw ConfigError("kmeans_anchors: k must be >= 1");
  std::vector<Anchor> pts;
  for (const auto& s : sizes)
    if (s.w >= 2.0 && s.h >= 2.0) pts.push_back(s);
  if (pts.empty()) {
    auto d = default_anchors(std::clamp((k + kAnchorsPerDetector - 1) / kAnchorsPerDetector, 1, 3));
    d.resize(static_cast<size_t>(k), d.back());
    return d;
  }
  std::stable_sort(pts.begin(), pts.end(), [](const Anchor& a, const Anchor& b) { return a.w * a.h < b.w * b.h; });

  std::vector<Anchor> centres(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    const size_t idx = std::min(pts.size() - 1, static_cast<size_t>((i + 0.5) / k * pts.size()));
    centres[i] = pts[idx];
  }
  std::vector<int> assign(pts.size(), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (size_t p = 0; p < pts.size(); ++p) {
      int best = 0;
      double best_iou = -1;
      for (int c = 0; c < k; ++c) {
        const double v = wh_iou(pts[p], centres[c]);
        if (v > best_iou) best_iou = v, best = c;
      }
      if (assign[p] != best) assign[p] = best, changed = true;
    }
    for (int c = 0; c < k; ++c) {
      double sw = 0, sh = 0;
      int count = 0;
      for (size_t p = 0; p < pts.size(); ++p)
        if (assign[p] == c) sw += pts[p].w, sh += pts[p].h, ++count;
      if (count > 0) centres[c] = {sw / count, sh / count};
    }
    if (!changed) break;
  }
  std::stable_sort(centres.begin(), centres.end(),
                   [](const Anchor& a, const Anchor& b) { return a.w * a.h < b.w * b.h; });
  return centres;
}

double anchor_fitness(const std::vector<Anchor>& sizes, const std::vector<Anchor>& anchors) {
  if (sizes.empty() || anchors.empty()) return 0.0;
  double total = 0;
  for (const auto& s : sizes) {
    double best = 0;
    for (const auto& a : anchors) best = std::max(best, wh_iou(s, a));
    total += best;
  }
  return total / static_cast<double>(sizes.size());
}

}  // namespace superyolo::model
