/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "superyolo/anchors.hpp"
#include "superyolo/error.hpp"
#include "superyolo/model.hpp"
#include "superyolo/postprocess.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace superyolo::model {
namespace {

using testing::random_tensor;

HeadConfig one_detector(int n_classes) {
  HeadConfig h;
  h.n_classes = n_classes;
  h.anchors = default_anchors(1);
  h.strides = {4};
  return h;
}

TEST(Head, DecodeEncodeAreInverse) {
  Rng rng(51);
  const Anchor anchor{12.0, 20.0};
  for (int t = 0; t < 500; ++t) {
    const std::array<double, 4> logits{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const int gx = static_cast<int>(rng.integer(0, 30)), gy = static_cast<int>(rng.integer(0, 30));
    const auto box = decode_cell(logits, gx, gy, 8, anchor);
    const auto back = encode_cell(box, gx, gy, 8, anchor);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(back[i], logits[i], 1e-7 * (1 + std::abs(logits[i])));
  }
  EXPECT_THROW(encode_cell({100, 4, 10, 10}, 0, 0, 8, anchor), RangeError);
}

TEST(Head, DecodeCellClosedForm) {
  const auto b = decode_cell({0, 0, 0, 0}, 3, 5, 8, Anchor{10, 16});
  EXPECT_DOUBLE_EQ(b[0], (0.5 + 3) * 8);
  EXPECT_DOUBLE_EQ(b[1], (0.5 + 5) * 8);
  EXPECT_DOUBLE_EQ(b[2], 10.0);
  EXPECT_DOUBLE_EQ(b[3], 16.0);
}

TEST(Head, DecodePlacesSingleConfidentCell) {
  const HeadConfig h = one_detector(3);
  const int no = h.outputs_per_anchor();
  Tensor<float> raw({1, 3 * no, 8, 8}, -20.0f);
  const int a = 1, gx = 5, gy = 2;
  for (int k = 0; k < 4; ++k) raw.at(0, a * no + k, gy, gx) = 0.0f;
  raw.at(0, a * no + 4, gy, gx) = 5.0f;
  raw.at(0, a * no + 5 + 2, gy, gx) = 3.0f;
  const auto out = decode(std::vector<Tensor<float>>{raw}, h, 32, 32, 0.01);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].size(), 1u);
  const Detection& d = out[0][0];
  EXPECT_EQ(d.class_id, 2);
  EXPECT_NEAR(d.score, sigmoid(5.0) * sigmoid(3.0), 1e-6);
  const Anchor an = h.anchors[a];
  EXPECT_NEAR(d.x1, std::max(0.0, 22.0 - an.w / 2), 1e-4);
  EXPECT_NEAR(d.x2, std::min(32.0, 22.0 + an.w / 2), 1e-4);
  EXPECT_NEAR(d.y1, std::max(0.0, 10.0 - an.h / 2), 1e-4);
}

TEST(Head, ForwardChannelLayout) {
  ModelConfig cfg = preset("superyolo");
  cfg.sr_enabled = false;
  cfg.head.n_classes = 2;
  cfg.backbone.width_multiple = 0.125;
  const SuperYolo<float> net(cfg.resolved());
  Rng rng(52);
  const auto out = net.forward(Var<float>(random_tensor<float>({1, 3, 64, 32}, rng, 0, 1)),
                               Var<float>(random_tensor<float>({1, 1, 64, 32}, rng, 0, 1)));
  ASSERT_EQ(out.raw.size(), 1u);
  EXPECT_EQ(out.raw[0].shape(), (Shape{1, 21, 16, 8}));
  const SuperYolo<float> v5(preset("yolov5s"));
  EXPECT_EQ(v5.config().head.strides, (std::vector<int>{8, 16, 32}));
}

// Characterization of greedy suppression: the kept set K is the unique set
// where a box belongs to K iff no higher-scored member of K of the same class
// overlaps it by more than the threshold.
TEST(Nms, MatchesBruteForceCharacterization) {
  Rng rng(53);
  for (int inst = 0; inst < 200; ++inst) {
    const double thr = rng.uniform(0.2, 0.8);
    const DetectionList dets = testing::random_nms_instance(rng, 20);
    const DetectionList expect = testing::nms_brute_force(dets, thr);
    DetectionList order = dets;
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    const DetectionList got = nms(dets, thr);
    EXPECT_EQ(got, expect) << "instance " << inst;
    for (const auto& d : order) {
      const bool in = std::find(got.begin(), got.end(), d) != got.end();
      bool blocked = false;
      for (const auto& k : got)
        if (k.score > d.score && k.class_id == d.class_id && iou(k.box(), d.box()) > thr) blocked = true;
      EXPECT_EQ(in, !blocked);
    }
  }
}

TEST(Nms, CapsOutput) {
  DetectionList dets;
  for (int i = 0; i < 10; ++i) dets.push_back({0, 1.0 - 0.01 * i, 20.0 * i, 0, 20.0 * i + 10, 10});
  const auto got = nms(dets, 0.5, 4);
  ASSERT_EQ(got.size(), 4u);
  EXPECT_DOUBLE_EQ(got[3].score, 0.97);
}

TEST(Nms, DetectionTextRoundTrip) {
  DetectionList dets{{1, 0.875, 1.5, 2.25, 10, 20}, {0, 0.1, 0, 0, 3, 3}};
  const auto parsed = parse_detections(serialize_detections("img", dets));
  ASSERT_EQ(parsed.count("img"), 1u);
  EXPECT_EQ(parsed.at("img"), dets);
}

TEST(Anchors, KmeansRecoversSeparatedClusters) {
  Rng rng(54);
  std::vector<Anchor> sizes;
  const Anchor centres[3] = {{8, 8}, {30, 15}, {80, 90}};
  for (int i = 0; i < 300; ++i) {
    const Anchor& c = centres[i % 3];
    sizes.push_back({c.w * rng.uniform(0.95, 1.05), c.h * rng.uniform(0.95, 1.05)});
  }
  const auto got = kmeans_anchors(sizes, 3);
  ASSERT_EQ(got.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(got[k].w, centres[k].w, 0.05 * centres[k].w);
    EXPECT_NEAR(got[k].h, centres[k].h, 0.05 * centres[k].h);
  }
  EXPECT_GT(anchor_fitness(sizes, got), 0.9);
  EXPECT_EQ(kmeans_anchors(sizes, 3), got);
  EXPECT_EQ(kmeans_anchors({{1, 1}}, 3), default_anchors(1));
}

}  // namespace
}  // namespace superyolo::model
