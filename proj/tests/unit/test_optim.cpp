/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "superyolo/layers.hpp"
#include "superyolo/optim.hpp"

namespace superyolo::train {
namespace {

using nn::Tensor;
using nn::Var;

TEST(Sgd, NesterovMatchesScalarRecurrence) {
  Var<float> w(Tensor<float>({1, 1, 1, 2}, 1.0f), true);
  Var<float> b(Tensor<float>({1, 1, 1, 1}, 0.5f), true);
  std::vector<nn::NamedParameter<float>> params{{"w", w, true}, {"b", b, false}};
  Sgd opt(params, 0.9, 0.1, true);
  // Reference state, written directly from the update rule.
  double pw = 1.0, pb = 0.5, bw = 0, bb = 0;
  for (int step = 0; step < 5; ++step) {
    const double gw = 0.3 * (step + 1), gb = -0.2;
    w.grad() = Tensor<float>({1, 1, 1, 2}, static_cast<float>(gw));
    b.grad() = Tensor<float>({1, 1, 1, 1}, static_cast<float>(gb));
    opt.step(0.05);
    const double dw = gw + 0.1 * pw, db = gb;
    bw = step == 0 ? dw : 0.9 * bw + dw;
    bb = step == 0 ? db : 0.9 * bb + db;
    pw -= 0.05 * (dw + 0.9 * bw);
    pb -= 0.05 * (db + 0.9 * bb);
    EXPECT_NEAR(w.value().data()[1], pw, 1e-6);
    EXPECT_NEAR(b.value().item(), pb, 1e-6);
  }
  opt.zero_grad();
  EXPECT_EQ(w.grad().data()[0], 0.0f);
  const auto state = opt.state();
  EXPECT_NEAR(state.at("w").data()[0], bw, 1e-6);
  Sgd restored(params, 0.9, 0.1, true);
  restored.load_state(state);
  EXPECT_EQ(restored.state().at("b").item(), state.at("b").item());
}

TEST(Schedule, WarmupThenCosine) {
  const int64_t total = 100, warm = 10;
  EXPECT_NEAR(learning_rate(0, total, warm, 0.01, 0.1), 0.01 * 0.1 * 1.0, 1e-3 * 0.01);
  for (int64_t s = warm; s < total; ++s) {
    const double cosine = 0.1 + 0.9 * 0.5 * (1 + std::cos(std::numbers::pi * s / total));
    EXPECT_NEAR(learning_rate(s, total, warm, 0.01, 0.1), 0.01 * cosine, 1e-12);
  }
  double prev = 1;
  for (int64_t s = warm; s < total; ++s) {
    const double lr = learning_rate(s, total, warm, 0.01, 0.1);
    EXPECT_LE(lr, prev + 1e-15);
    prev = lr;
  }
  EXPECT_GE(learning_rate(total - 1, total, warm, 0.01, 0.1), 0.001);
}

}  // namespace
}  // namespace superyolo::train
