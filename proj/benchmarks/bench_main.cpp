/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <benchmark/benchmark.h>

#include "oracles.hpp"
#include "superyolo/autograd.hpp"
#include "superyolo/complexity.hpp"
#include "superyolo/model.hpp"
#include "superyolo/ops.hpp"
#include "test_support.hpp"

using namespace superyolo;

namespace {

void BM_Conv3x3(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), hw = static_cast<int>(state.range(1));
  Rng rng(1);
  nn::NoGradGuard guard;
  const nn::Var<float> x(testing::random_tensor<float>({1, c, hw, hw}, rng), false);
  const nn::Var<float> w(testing::random_tensor<float>({c, c, 3, 3}, rng), false);
  const nn::Var<float> b(testing::random_tensor<float>({c}, rng), false);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, b, 1, 1));
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * c * c * 9 * hw * hw * 1e-9, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3)->Args({32, 128})->Args({64, 64})->Args({128, 32})->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  model::SuperYolo<float> net(model::preset("superyolo"));
  net.set_training(false);
  Rng rng(2);
  nn::NoGradGuard guard;
  const nn::Var<float> rgb(testing::random_tensor<float>({1, 3, size, size}, rng, 0, 1), false);
  const nn::Var<float> ir(testing::random_tensor<float>({1, 1, size, size}, rng, 0, 1), false);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(rgb, ir));
}
BENCHMARK(BM_ModelForward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Nms(benchmark::State& state) {
  Rng rng(3);
  model::DetectionList dets;
  for (int i = 0; i < state.range(0); ++i) {
    const auto b = testing::random_box(rng, 512, 8, 64);
    dets.push_back({static_cast<int>(rng.integer(0, 2)), rng.uniform(), b.x1, b.y1, b.x2, b.y2});
  }
  for (auto _ : state) benchmark::DoNotOptimize(model::nms(dets, 0.45));
}
BENCHMARK(BM_Nms)->Arg(100)->Arg(1000)->Arg(5000);

void BM_AveragePrecision(benchmark::State& state) {
  Rng rng(4);
  std::vector<model::DetectionList> dets;
  std::vector<std::vector<metrics::GroundTruth>> gts;
  for (int i = 0; i < state.range(0); ++i) {
    const auto f = testing::random_ap_fixture(rng);
    dets.insert(dets.end(), f.dets.begin(), f.dets.end());
    gts.insert(gts.end(), f.gts.begin(), f.gts.end());
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::average_precision(dets, gts, 0, 0.5));
}
BENCHMARK(BM_AveragePrecision)->Arg(50)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
