/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <string>

#include "superyolo/backbone.hpp"
#include "superyolo/error.hpp"
#include "superyolo/fusion.hpp"
#include "superyolo/model.hpp"
#include "superyolo/sr_branch.hpp"
#include "gradient_suite.hpp"

namespace superyolo::model {
namespace {

using testing::random_tensor;

using testing::tiny_sr;

TEST(SrBranch, ReconstructsAtTwiceTheInput) {
  Rng rng(41);
  BackboneConfig bcfg;
  bcfg.width_multiple = 0.125;
  bcfg.in_channels = 4;
  Backbone<float> bb(bcfg, rng);
  for (auto kind : {EncoderKind::kPlain, EncoderKind::kEdsr}) {
    SrBranch<float> sr(tiny_sr(kind), bb.channels(4), bb.channels(9), bb.stride(9) / bb.stride(4), rng);
    EXPECT_EQ(sr.upsample(), 4);
    const auto taps = bb.forward(Var<float>(random_tensor<float>({2, 4, 32, 64}, rng)));
    EXPECT_EQ(sr.forward(taps.low_level, taps.high_level).shape(), (Shape{2, 3, 64, 128}));
  }
  SrConfig ir = tiny_sr(EncoderKind::kPlain);
  ir.target = SrTarget::kIr;
  EXPECT_EQ(ir.output_channels(), 1);
}

TEST(SrBranch, EncoderCountExcludesDecoder) {
  Rng rng(42);
  SrBranch<float> sr(tiny_sr(EncoderKind::kPlain), 8, 16, 4, rng);
  int64_t decoder = 0;
  for (const auto& p : sr.named_parameters())
    if (p.name.rfind("decoder.", 0) == 0) decoder += p.var.value().numel();
  EXPECT_EQ(decoder, (6 * 4 * 16 + 4) + (4 * 3 * 16 + 3) + (3 * 3 * 16 + 3));
  EXPECT_EQ(sr.encoder_parameter_count() + decoder, sr.parameter_count());
}

TEST(SrBranch, TapMismatchAndConfigErrors) {
  Rng rng(43);
  SrBranch<float> sr(tiny_sr(EncoderKind::kPlain), 8, 16, 4, rng);
  EXPECT_THROW(sr.forward(Var<float>(Tensor<float>({1, 8, 8, 8})), Var<float>(Tensor<float>({1, 16, 4, 4}))),
               ShapeError);
  SrConfig bad = tiny_sr(EncoderKind::kPlain);
  bad.decoder_widths = {4};
  EXPECT_THROW(SrBranch<float>(bad, 8, 16, 4, rng), ConfigError);
  EXPECT_THROW(parse_sr_loss_kind("l3"), ConfigError);
  EXPECT_EQ(parse_encoder_kind("edsr"), EncoderKind::kEdsr);
}

TEST(SrBranch, LossKinds) {
  Tensor<double> a({1, 1, 1, 4}), b({1, 1, 1, 4});
  for (int i = 0; i < 4; ++i) a.data()[i] = i, b.data()[i] = 2.0 * i;
  EXPECT_DOUBLE_EQ(sr_loss(Var<double>(a), b, SrLossKind::kL1).value().item(), 6.0 / 4);
  EXPECT_DOUBLE_EQ(sr_loss(Var<double>(a), b, SrLossKind::kL2).value().item(), 14.0 / 4);
  EXPECT_THROW(sr_loss(Var<double>(a), Tensor<double>({1, 1, 2, 2}), SrLossKind::kL1), ShapeError);
}

class SrPipeline : public ::testing::TestWithParam<std::tuple<EncoderKind, SrLossKind>> {};

TEST_P(SrPipeline, GradientCheck) {
  const auto res = testing::sr_pipeline_gradient_check(std::get<0>(GetParam()), std::get<1>(GetParam()));
  EXPECT_LT(res.worst, 1e-4) << res.where;
  EXPECT_GT(res.checked, 50);
}

INSTANTIATE_TEST_SUITE_P(Encoders, SrPipeline,
                         ::testing::Combine(::testing::Values(EncoderKind::kPlain, EncoderKind::kEdsr),
                                            ::testing::Values(SrLossKind::kL2, SrLossKind::kL1)),
                         [](const auto& info) {
                           return std::string(std::get<0>(info.param) == EncoderKind::kEdsr ? "Edsr" : "Plain") +
                                  (std::get<1>(info.param) == SrLossKind::kL1 ? "L1" : "L2");
                         });

TEST(SrBranch, AbsentWhenDisabled) {
  ModelConfig cfg = preset("superyolo");
  cfg.sr_enabled = false;
  const SuperYolo<float> net(cfg);
  EXPECT_FALSE(net.has_sr());
  for (const auto& [name, t] : net.state_dict()) EXPECT_NE(name.rfind("sr.", 0), 0u) << name;
  const SuperYolo<float> full(preset("superyolo"));
  EXPECT_TRUE(full.has_sr());
  EXPECT_GT(full.parameter_count(), net.parameter_count());
}

}  // namespace
}  // namespace superyolo::model
