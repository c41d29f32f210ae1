/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cmath>

#include "superyolo/error.hpp"
#include "superyolo/fusion.hpp"
#include "gradient_suite.hpp"

namespace superyolo::model {
namespace {

using testing::random_tensor;
using Arr = std::vector<double>;  // [c][y][x] for one image

struct Plain {
  int c, h, w;
  Arr v;
  double& at(int ch, int y, int x) { return v[(static_cast<size_t>(ch) * h + y) * w + x]; }
  double at(int ch, int y, int x) const { return v[(static_cast<size_t>(ch) * h + y) * w + x]; }
};

Plain from_tensor(const Tensor<double>& t, int n) {
  Plain p{static_cast<int>(t.shape().c), static_cast<int>(t.shape().h), static_cast<int>(t.shape().w), {}};
  p.v.resize(static_cast<size_t>(p.c) * p.h * p.w);
  for (int c = 0; c < p.c; ++c)
    for (int y = 0; y < p.h; ++y)
      for (int x = 0; x < p.w; ++x) p.at(c, y, x) = t.at(n, c, y, x);
  return p;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Plain pointwise(const Plain& in, nn::Conv2d<double>& conv) {
  const auto& w = conv.weight().value();
  const auto& b = conv.bias().value();
  Plain out{static_cast<int>(w.shape().n), in.h, in.w, {}};
  out.v.assign(static_cast<size_t>(out.c) * in.h * in.w, 0.0);
  for (int o = 0; o < out.c; ++o)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        double acc = b.data()[o];
        for (int c = 0; c < in.c; ++c) acc += w.at(o, c, 0, 0) * in.at(c, y, x);
        out.at(o, y, x) = acc;
      }
  return out;
}

Plain se(const Plain& in, nn::SqueezeExcite<double>& m) {
  const auto& w1 = m.squeeze().weight().value();
  const auto& b1 = m.squeeze().bias().value();
  const auto& w2 = m.expand().weight().value();
  const auto& b2 = m.expand().bias().value();
  Arr mean(in.c, 0.0);
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) mean[c] += in.at(c, y, x);
    mean[c] /= in.h * in.w;
  }
  Arr hidden(m.hidden());
  for (int j = 0; j < m.hidden(); ++j) {
    double acc = b1.data()[j];
    for (int c = 0; c < in.c; ++c) acc += w1.at(j, c, 0, 0) * mean[c];
    hidden[j] = std::max(acc, 0.0);
  }
  Plain out = in;
  for (int c = 0; c < in.c; ++c) {
    double acc = b2.data()[c];
    for (int j = 0; j < m.hidden(); ++j) acc += w2.at(c, j, 0, 0) * hidden[j];
    const double g = sig(acc);
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) out.at(c, y, x) *= g;
  }
  return out;
}

using testing::randomize_parameters;

class MfOracle : public ::testing::TestWithParam<bool> {};

TEST_P(MfOracle, ForwardMatchesLoopImplementation) {
  Rng rng(21);
  MfConfig cfg;
  cfg.out_channels = 8;
  cfg.se_reduction = 4;
  cfg.cross_gate = GetParam();
  MfFusion<double> mf(cfg, rng);
  randomize_parameters(mf, rng);
  const auto rgb = random_tensor<double>({2, 3, 5, 4}, rng, 0, 1);
  const auto ir = random_tensor<double>({2, 1, 5, 4}, rng, 0, 1);
  MfTrace<double> trace;
  const auto out = mf.forward(Var<double>(rgb), Var<double>(ir), &trace).value();
  ASSERT_EQ(out.shape(), (Shape{2, 8, 5, 4}));
  for (int n = 0; n < 2; ++n) {
    const Plain i_rgb = from_tensor(rgb, n), i_ir = from_tensor(ir, n);
    const Plain f_rgb = se(i_rgb, mf.se_rgb()), f_ir = se(i_ir, mf.se_ir());
    const Plain m_ir = pointwise(f_ir, mf.f1()), m_rgb = pointwise(f_rgb, mf.f2());
    const Plain& gate_rgb = cfg.cross_gate ? m_ir : m_rgb;
    const Plain& gate_ir = cfg.cross_gate ? m_rgb : m_ir;
    Plain in1 = f_rgb, in2 = f_ir;
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 4; ++x) {
        for (int c = 0; c < 3; ++c) in1.at(c, y, x) = gate_rgb.at(0, y, x) * f_rgb.at(c, y, x) + i_rgb.at(c, y, x);
        in2.at(0, y, x) = gate_ir.at(0, y, x) * f_ir.at(0, y, x) + i_ir.at(0, y, x);
      }
    const Plain ful1 = pointwise(in1, mf.f3()), ful2 = pointwise(in2, mf.f4());
    Plain cat{8, 5, 4, ful1.v};
    cat.v.insert(cat.v.end(), ful2.v.begin(), ful2.v.end());
    const Plain expect = se(cat, mf.se_out());
    const Plain got = from_tensor(out, n);
    for (size_t i = 0; i < got.v.size(); ++i) EXPECT_NEAR(got.v[i], expect.v[i], 1e-12);
    const Plain traced_m = from_tensor(trace.m_rgb.value(), n);
    for (size_t i = 0; i < traced_m.v.size(); ++i) EXPECT_NEAR(traced_m.v[i], m_rgb.v[i], 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Gating, MfOracle, ::testing::Values(false, true));

TEST(Mf, GradientCheck) {
  for (bool cross : {false, true}) {
    const auto res = testing::mf_gradient_check(cross);
    EXPECT_LT(res.worst, 1e-4) << res.where;
    EXPECT_GT(res.checked, 60);
  }
}

TEST(Mf, SeGateInUnitInterval) {
  Rng rng(23);
  nn::SqueezeExcite<double> m(8, 4, rng);
  const auto g = m.gate(Var<double>(random_tensor<double>({3, 8, 4, 4}, rng, -5, 5))).value();
  EXPECT_EQ(g.shape(), (Shape{3, 8, 1, 1}));
  for (double v : g.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Mf, RejectsMismatchedInputs) {
  Rng rng(24);
  MfFusion<double> mf(MfConfig{}, rng);
  EXPECT_THROW(mf.forward(Var<double>(Tensor<double>({1, 3, 8, 8})), Var<double>(Tensor<double>({1, 1, 8, 4}))),
               ShapeError);
  EXPECT_THROW(mf.forward(Var<double>(Tensor<double>({1, 1, 8, 8})), Var<double>(Tensor<double>({1, 1, 8, 8}))),
               ShapeError);
  MfConfig bad;
  bad.se_reduction = 0;
  EXPECT_THROW(MfFusion<double>(bad, rng), ConfigError);
}

TEST(Fusion, ConcatAndSingleModality) {
  Rng rng(25);
  const auto rgb = random_tensor<double>({1, 3, 4, 4}, rng);
  const auto ir = random_tensor<double>({1, 1, 4, 4}, rng);
  Fusion<double> cat(FusionKind::kConcat, MfConfig{}, rng);
  const auto y = cat.forward(Var<double>(rgb), Var<double>(ir)).value();
  EXPECT_EQ(cat.out_channels(), 4);
  EXPECT_EQ(cat.parameter_count(), 0);
  EXPECT_EQ(y.at(0, 3, 2, 1), ir.at(0, 0, 2, 1));
  EXPECT_EQ(y.at(0, 1, 0, 3), rgb.at(0, 1, 0, 3));
  Fusion<double> only_rgb(FusionKind::kRgb, MfConfig{}, rng);
  EXPECT_EQ(testing::max_abs_diff(only_rgb.forward(Var<double>(rgb), Var<double>(ir)).value(), rgb), 0.0);
  Fusion<double> only_ir(FusionKind::kIr, MfConfig{}, rng);
  EXPECT_EQ(only_ir.out_channels(), 1);
  EXPECT_EQ(parse_fusion_kind(to_string(FusionKind::kMf)), FusionKind::kMf);
  EXPECT_THROW(parse_fusion_kind("sum"), ConfigError);
}

}  // namespace
}  // namespace superyolo::model
