/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "superyolo/detection_metrics.hpp"
#include "superyolo/error.hpp"
#include "superyolo/image_quality.hpp"
#include "superyolo/random.hpp"
#include "oracles.hpp"

namespace superyolo::metrics {
namespace {

using data::Raster;

TEST(AveragePrecision, MatchesEnumerationOracle) {
  Rng rng(71);
  for (int fixture = 0; fixture < 50; ++fixture) {
    const auto f = testing::random_ap_fixture(rng);
    for (int cls = 0; cls < 2; ++cls) {
      const PrCurve c = average_precision(f.dets, f.gts, cls, 0.5);
      EXPECT_NEAR(c.ap, testing::ap_oracle(f.dets, f.gts, cls, 0.5), 1e-12) << "fixture " << fixture << " class " << cls;
      EXPECT_TRUE(std::is_sorted(c.recall.begin(), c.recall.end()));
    }
  }
}

TEST(AveragePrecision, PerfectAndEmpty) {
  std::vector<std::vector<GroundTruth>> gts{{{0, {0, 0, 10, 10}}, {0, {20, 20, 30, 30}}}};
  std::vector<DetectionList> dets{{{0, 0.9, 0, 0, 10, 10}, {0, 0.8, 20, 20, 30, 30}}};
  EXPECT_DOUBLE_EQ(average_precision(dets, gts, 0).ap, 1.0);
  EXPECT_DOUBLE_EQ(average_precision({{}}, gts, 0).ap, 0.0);
  const auto r = evaluate_detections(dets, gts, 3);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(r.included, (std::vector<char>{1, 0, 0}));
  EXPECT_EQ(r.counts, (ConfusionCounts{2, 0, 0}));
  EXPECT_THROW(average_precision(dets, {}, 0), ShapeError);
}

TEST(AveragePrecision, InterpolationClosedForm) {
  // recall 0.5 at precision 1, then 1.0 at precision 0.5.
  EXPECT_NEAR(interpolated_ap({0.5, 0.5, 1.0}, {1.0, 0.5, 2.0 / 3}), (51 * 1.0 + 50 * 2.0 / 3) / 101, 1e-15);
  EXPECT_DOUBLE_EQ(interpolated_ap({}, {}), 0.0);
}

TEST(Matching, GreedyByScore) {
  const std::vector<GroundTruth> gts{{0, {0, 0, 10, 10}}};
  const DetectionList dets{{0, 0.3, 0, 0, 10, 10}, {0, 0.9, 1, 1, 11, 11}, {1, 0.95, 0, 0, 10, 10}};
  std::vector<char> flags;
  const auto c = match_detections(dets, gts, 0.5, &flags);
  EXPECT_EQ(c, (ConfusionCounts{1, 2, 0}));
  EXPECT_EQ(flags, (std::vector<char>{0, 1, 0}));
  EXPECT_EQ(precision_recall({0, 0, 0}), (std::pair<double, double>{1.0, 1.0}));
  const auto gt = to_ground_truth({{2, 0.5, 0.25, 0.5, 0.5}}, 40, 80);
  EXPECT_DOUBLE_EQ(gt[0].box.x1, 20);
  EXPECT_DOUBLE_EQ(gt[0].box.y2, 20);
}

Raster random_raster(int c, int h, int w, Rng& rng) {
  Raster r(c, h, w);
  for (auto& v : r.pixels) v = static_cast<float>(rng.uniform());
  return r;
}

TEST(ImageQuality, Identities) {
  Rng rng(72);
  const Raster x = random_raster(3, 16, 20, rng);
  EXPECT_EQ(psnr(x, x), kPsnrIdentical);
  EXPECT_TRUE(std::isinf(psnr(x, x)));
  EXPECT_DOUBLE_EQ(ssim(x, x), 1.0);
  const std::vector<double> a(64, 0.25), b(64, 0.35);
  EXPECT_NEAR(psnr<double>(a, b), 20.0, 1e-9);
  Raster y = x;
  for (auto& v : y.pixels) v = 1.0f - v;
  EXPECT_LT(ssim(x, y), 0.0);
  EXPECT_THROW(ssim(Raster(1, 10, 20), Raster(1, 10, 20)), ShapeError);
  EXPECT_THROW(psnr(x, Raster(3, 16, 21)), ShapeError);
}

// Direct windowed SSIM at every valid position.
double ssim_oracle(const Raster& a, const Raster& b) {
  double g[11], gs = 0;
  for (int i = 0; i < 11; ++i) gs += g[i] = std::exp(-(i - 5) * (i - 5) / (2 * 1.5 * 1.5));
  const double C1 = 1e-4, C2 = 9e-4;
  double total = 0;
  int count = 0;
  for (int c = 0; c < a.channels; ++c) {
    double channel = 0;
    int n = 0;
    for (int y = 0; y + 11 <= a.height; ++y)
      for (int x = 0; x + 11 <= a.width; ++x) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double w = g[i] * g[j] / (gs * gs);
            const double p = a.at(c, y + i, x + j), q = b.at(c, y + i, x + j);
            mx += w * p, my += w * q, sxx += w * p * p, syy += w * q * q, sxy += w * p * q;
          }
        sxx -= mx * mx, syy -= my * my, sxy -= mx * my;
        channel += ((2 * mx * my + C1) * (2 * sxy + C2)) / ((mx * mx + my * my + C1) * (sxx + syy + C2));
        ++n;
      }
    total += channel / n;
    ++count;
  }
  return total / count;
}

TEST(ImageQuality, SsimMatchesWindowedOracle) {
  Rng rng(73);
  for (int t = 0; t < 5; ++t) {
    const Raster a = random_raster(2, 14, 17, rng);
    Raster b = a;
    for (auto& v : b.pixels) v = std::clamp(v + static_cast<float>(rng.uniform(-0.2, 0.2)), 0.0f, 1.0f);
    EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b), 1e-9);
  }
}

}  // namespace
}  // namespace superyolo::metrics
