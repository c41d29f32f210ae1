/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include "superyolo/backbone.hpp"
#include "superyolo/complexity.hpp"
#include "superyolo/error.hpp"
#include "superyolo/model.hpp"
#include "gradient_suite.hpp"

namespace superyolo::model {
namespace {

using testing::random_tensor;

TEST(Backbone, ScalingHelpers) {
  EXPECT_EQ(make_divisible(32.0), 32);
  EXPECT_EQ(make_divisible(33.0), 40);
  EXPECT_EQ(make_divisible(4.0), 8);
  EXPECT_EQ(scaled_depth(9, 0.33), 3);
  EXPECT_EQ(scaled_depth(3, 0.33), 1);
  EXPECT_EQ(scaled_depth(1, 0.01), 1);
}

TEST(Backbone, LayerTableWithStrideOneStem) {
  Rng rng(31);
  Backbone<float> bb(BackboneConfig{}, rng);
  const auto table = bb.layer_table();
  ASSERT_EQ(table.size(), 10u);
  const int strides[10] = {1, 2, 2, 4, 4, 8, 8, 16, 16, 16};
  const int widths[10] = {32, 64, 64, 128, 128, 256, 256, 512, 512, 512};
  const int repeats[10] = {1, 1, 1, 1, 3, 1, 3, 1, 1, 1};
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(table[i].stride, strides[i]) << i;
    EXPECT_EQ(table[i].out_channels, widths[i]) << i;
    EXPECT_EQ(table[i].repeats, repeats[i]) << i;
  }
  int64_t sum = 0;
  for (const auto& row : table) sum += row.params;
  EXPECT_EQ(sum, bb.parameter_count());
  EXPECT_EQ(table[8].type, "SPP");
}

TEST(Backbone, FocusStemQuartersResolution) {
  Rng rng(32);
  BackboneConfig cfg;
  cfg.use_focus = true;
  cfg.in_channels = 4;
  Backbone<float> bb(cfg, rng);
  EXPECT_EQ(bb.stride(0), 2);
  EXPECT_EQ(bb.max_stride(), 32);
}

TEST(Backbone, ForwardShapesAndTaps) {
  Rng rng(33);
  BackboneConfig cfg;
  cfg.width_multiple = 0.125;
  cfg.in_channels = 4;
  Backbone<float> bb(cfg, rng);
  const auto taps = bb.forward(Var<float>(random_tensor<float>({1, 4, 32, 32}, rng)));
  EXPECT_EQ(taps.low_level.shape(), (Shape{1, bb.channels(4), 8, 8}));
  EXPECT_EQ(taps.high_level.shape(), (Shape{1, bb.channels(9), 2, 2}));
  EXPECT_EQ(taps.stride_low, 4);
  EXPECT_EQ(taps.stride_high, 16);
  ASSERT_EQ(taps.pyramid.size(), 3u);
  EXPECT_EQ(taps.pyramid[1].shape().h, 4);
  EXPECT_THROW(bb.forward(Var<float>(Tensor<float>({1, 4, 24, 24}))), ShapeError);
  EXPECT_THROW(bb.forward(Var<float>(Tensor<float>({1, 3, 32, 32}))), ShapeError);
}

TEST(Backbone, InvalidConfig) {
  Rng rng(34);
  BackboneConfig cfg;
  cfg.tap_low = 9;
  cfg.tap_high = 4;
  EXPECT_THROW(Backbone<float>(cfg, rng), ConfigError);
  cfg = BackboneConfig{};
  cfg.width_multiple = 0;
  EXPECT_THROW(Backbone<float>(cfg, rng), ConfigError);
}

TEST(Backbone, MiniatureGradientCheck) {
  const auto res = testing::backbone_gradient_check();
  EXPECT_LT(res.worst, 1e-4) << res.where;
  EXPECT_GT(res.checked, 100);
}

TEST(Complexity, ConvParamsMatchClosedForm) {
  Rng rng(36);
  nn::Conv2d<float> conv(5, 7, 3, 1, 1, true, rng);
  EXPECT_EQ(metrics::count_params(conv), 7 * 5 * 9 + 7);
  nn::SqueezeExcite<float> se(32, 16, rng);
  EXPECT_EQ(metrics::count_params(se), (32 * 2 + 2) + (2 * 32 + 32));
}

TEST(Complexity, GflopsScaleWithArea) {
  const SuperYolo<float> net(preset("superyolo"));
  const double g256 = metrics::count_gflops(net, 256, 256);
  const double g512 = metrics::count_gflops(net, 512, 512);
  EXPECT_NEAR(g512 / g256, 4.0, 0.04);
  EXPECT_GT(metrics::count_gflops(net, 256, 256, true), g256);
  const auto rep = metrics::complexity_report(net, 256, 256, "superyolo");
  int64_t params = 0;
  double gflops = 0;
  for (const auto& m : rep.breakdown) params += m.params, gflops += m.gflops;
  EXPECT_EQ(params, rep.total_params);
  EXPECT_NEAR(gflops, rep.gflops, 1e-9 * rep.gflops);
  EXPECT_EQ(rep.total_params + rep.training_only_params, net.parameter_count());
}

}  // namespace
}  // namespace superyolo::model
