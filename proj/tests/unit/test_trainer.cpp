/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "superyolo/checkpoint.hpp"
#include "superyolo/complexity.hpp"
#include "superyolo/config.hpp"
#include "superyolo/error.hpp"
#include "superyolo/synthetic.hpp"
#include "superyolo/trainer.hpp"

namespace superyolo::train {
namespace {

namespace fs = std::filesystem;
using config::apply_override;
using config::Json;

std::vector<data::Sample> synthetic_set(int n, int hr_size) {
  data::SyntheticConfig s;
  s.seed = 3;
  s.image_size = hr_size;
  s.n_classes = 3;
  std::vector<data::Sample> out;
  for (int i = 0; i < n; ++i) out.push_back(data::render_synthetic_sample(s, i));
  return out;
}

double testing_max_abs_diff(const nn::Tensor<float>& a, const nn::Tensor<float>& b) {
  if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
  double d = 0;
  for (int64_t i = 0; i < a.numel(); ++i) d = std::max(d, double(std::abs(a.data()[i] - b.data()[i])));
  return d;
}

Json small_config(std::initializer_list<std::string> extra = {}) {
  Json cfg = config::defaults();
  for (const char* kv : {"model.n_classes=3", "model.width_multiple=0.125", "train.image_size=32", "train.epochs=1",
                         "train.batch_size=2", "train.max_steps=2", "train.warmup_epochs=0"})
    apply_override(cfg, kv);
  for (const auto& kv : extra) apply_override(cfg, kv);
  return cfg;
}

TEST(Trainer, TwoStepsAreDeterministic) {
  const auto data = synthetic_set(4, 64);
  const Json cfg = small_config();
  const TrainResult a = train(cfg, data);
  const TrainResult b = train(cfg, data);
  ASSERT_EQ(a.history.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.history[i].loss.l_total, b.history[i].loss.l_total);
    EXPECT_TRUE(std::isfinite(a.history[i].loss.l_total));
    EXPECT_GT(a.history[i].loss.l_s, 0.0);
  }
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(a.checkpoint.step, 2);
  EXPECT_FALSE(a.checkpoint.optimizer.empty());
  EXPECT_TRUE(a.checkpoint.config["model"]["anchors"].is_array());
  const TrainResult c = train(small_config({"train.seed=1"}), data);
  EXPECT_NE(serialize_checkpoint(a.checkpoint), serialize_checkpoint(c.checkpoint));
}

TEST(Trainer, ResumeContinuesTheSameRun) {
  const auto data = synthetic_set(4, 64);
  const Json cfg = small_config({"train.max_steps=4", "train.epochs=2"});
  const TrainResult full = train(cfg, data);
  const fs::path dir = fs::temp_directory_path() / "superyolo_resume_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  TrainOptions interrupted;
  interrupted.checkpoint_dir = dir.string();
  interrupted.on_step = [](const StepRecord& r) {
    if (r.step == 3) throw std::runtime_error("interrupted");
  };
  EXPECT_THROW(train(cfg, data, interrupted), std::runtime_error);
  const Checkpoint saved = load_checkpoint((dir / "last.syck").string());
  EXPECT_EQ(saved.step, 2);
  TrainOptions opt;
  opt.resume = &saved;
  const TrainResult rest = train(cfg, data, opt);
  EXPECT_EQ(rest.history.size(), 2u);
  EXPECT_EQ(serialize_checkpoint(rest.checkpoint), serialize_checkpoint(full.checkpoint));
  fs::remove_all(dir);
}

TEST(Trainer, DisabledSrContributesNothing) {
  const auto data = synthetic_set(2, 64);
  const TrainResult r = train(small_config({"model.sr_enabled=false"}), data);
  for (const auto& h : r.history) {
    EXPECT_EQ(h.loss.l_s, 0.0);
    EXPECT_FLOAT_EQ(h.loss.l_total, h.loss.c1 * h.loss.l_o);
  }
  for (const auto& [name, t] : r.checkpoint.weights) EXPECT_NE(name.rfind("sr.", 0), 0u);
}

double train_eval_gap(model::SuperYolo<float>& net, const Batch& batch) {
  nn::NoGradGuard guard;
  double worst = 0;
  net.set_training(true);
  const auto a = net.forward(nn::Var<float>(batch.rgb), nn::Var<float>(batch.ir)).raw[0].value();
  net.set_training(false);
  const auto b = net.forward(nn::Var<float>(batch.rgb), nn::Var<float>(batch.ir)).raw[0].value();
  for (int64_t i = 0; i < a.numel(); ++i) worst = std::max(worst, double(std::abs(a.data()[i] - b.data()[i])));
  return worst;
}

TEST(Trainer, BatchNormRecalibrationOnlyTouchesStatistics) {
  const auto data = synthetic_set(4, 128);
  const std::initializer_list<std::string> base{"train.max_steps=6", "train.epochs=6", "train.batch_size=4",
                                                "train.lr0=0.05", "augment.enabled=false", "train.image_size=64"};
  Json plain_cfg = small_config(base), recal_cfg = small_config(base);
  apply_override(recal_cfg, "train.bn_recalibration_batches=2");
  const TrainResult plain = train(plain_cfg, data);
  const TrainResult recal = train(recal_cfg, data);
  ASSERT_EQ(plain.history.size(), recal.history.size());
  for (size_t i = 0; i < plain.history.size(); ++i)
    EXPECT_EQ(plain.history[i].loss.l_total, recal.history[i].loss.l_total);
  int buffers_changed = 0;
  for (const auto& [name, t] : plain.checkpoint.weights) {
    const bool stat = name.ends_with("running_mean") || name.ends_with("running_var");
    const double d = testing_max_abs_diff(t, recal.checkpoint.weights.at(name));
    if (stat)
      buffers_changed += d > 0;
    else
      EXPECT_EQ(d, 0.0) << name;
  }
  EXPECT_GT(buffers_changed, 0);

  // With one batch holding the whole set, eval mode reproduces the batch
  // statistics up to the unbiased variance factor.
  std::vector<const data::Sample*> ptrs;
  for (const auto& s : data) ptrs.push_back(&s);
  const Batch batch = make_batch(ptrs, model::SrTarget::kRgb);
  const double gap_plain = train_eval_gap(*build_model(plain.checkpoint), batch);
  const double gap_recal = train_eval_gap(*build_model(recal.checkpoint), batch);
  EXPECT_LT(gap_recal, 0.25 * gap_plain);
  EXPECT_THROW(train(small_config({"train.bn_recalibration_batches=-1"}), data), ConfigError);
}

TEST(Trainer, ExportMatchesEvalModeTrainingModel) {
  const auto data = synthetic_set(4, 64);
  const TrainResult r = train(small_config(), data);
  const auto trained = build_model(r.checkpoint);
  const auto exported = build_model(export_inference(r.checkpoint));
  EXPECT_TRUE(trained->has_sr());
  EXPECT_FALSE(exported->has_sr());
  std::vector<data::ImagePair> pairs;
  for (const auto& s : synthetic_set(4, 32)) pairs.push_back(s.pair);
  const auto da = detect(*trained, pairs, 0.001), db = detect(*exported, pairs, 0.001);
  ASSERT_EQ(da.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    ASSERT_EQ(da[i].size(), db[i].size());
    for (size_t k = 0; k < da[i].size(); ++k) {
      EXPECT_LE(std::abs(da[i][k].score - db[i][k].score), 1e-6);
      EXPECT_LE(std::abs(da[i][k].x1 - db[i][k].x1), 1e-6);
      EXPECT_LE(std::abs(da[i][k].y2 - db[i][k].y2), 1e-6);
    }
  }
  EXPECT_EQ(metrics::count_gflops(*exported, 32, 32), metrics::count_gflops(*trained, 32, 32, false));
}

TEST(Trainer, EvaluationIsDeterministicAndChecksClasses) {
  const auto data = synthetic_set(3, 64);
  const TrainResult r = train(small_config(), data);
  const EvalReport a = evaluate(r.checkpoint, data, 3);
  const EvalReport b = evaluate(r.checkpoint, data, 3);
  EXPECT_EQ(a.detection.map, b.detection.map);
  EXPECT_EQ(a.detections, b.detections);
  EXPECT_EQ(a.input_h, 32);
  ASSERT_TRUE(a.psnr.has_value());
  EXPECT_EQ(*a.psnr, *b.psnr);
  EXPECT_THROW(evaluate(r.checkpoint, data, 5), ConfigError);
  EXPECT_FALSE(evaluate(export_inference(r.checkpoint), data, 3).psnr.has_value());
}

TEST(Trainer, UntrainedModelScoresNearZero) {
  const auto data = synthetic_set(4, 64);
  Json cfg = small_config();
  apply_override(cfg, "model.anchors=[8,8,12,12,16,16]");
  const model::SuperYolo<float> net(config::to_model_config(cfg));
  const EvalReport rep = evaluate(make_checkpoint(net, cfg), data, 3);
  EXPECT_LE(rep.detection.map, 0.05);
}

TEST(Trainer, RejectsBadDatasets) {
  auto data = synthetic_set(2, 64);
  EXPECT_THROW(train(small_config(), {}), ConfigError);
  EXPECT_THROW(train(small_config({"train.image_size=64"}), data), ShapeError);
  data[1].labels.push_back({7, 0.5, 0.5, 0.1, 0.1});
  EXPECT_THROW(train(small_config(), data), ConfigError);
}

TEST(Trainer, DivergenceWritesSnapshot) {
  const auto data = synthetic_set(2, 64);
  const fs::path dir = fs::temp_directory_path() / "superyolo_diverge";
  fs::remove_all(dir);
  fs::create_directories(dir);
  TrainOptions opt;
  opt.checkpoint_dir = dir.string();
  EXPECT_THROW(train(small_config({"train.lr0=1e30", "train.max_steps=6", "train.epochs=3"}), data, opt),
               DivergenceError);
  EXPECT_TRUE(fs::exists(dir / "diverged.syck"));
}

TEST(Trainer, MakeBatchDownsamplesInputs) {
  const auto data = synthetic_set(2, 64);
  const Batch b = make_batch({&data[0], &data[1]}, model::SrTarget::kRgb);
  EXPECT_EQ(b.rgb.shape(), (nn::Shape{2, 3, 32, 32}));
  EXPECT_EQ(b.ir.shape(), (nn::Shape{2, 1, 32, 32}));
  EXPECT_EQ(b.target.shape(), (nn::Shape{2, 3, 64, 64}));
  const float mean = (data[0].pair.rgb.at(0, 0, 0) + data[0].pair.rgb.at(0, 0, 1) + data[0].pair.rgb.at(0, 1, 0) +
                      data[0].pair.rgb.at(0, 1, 1)) / 4;
  EXPECT_NEAR(b.rgb.at(0, 0, 0, 0), mean, 1e-6);
  EXPECT_EQ(make_batch({&data[0]}, model::SrTarget::kIr).target.shape().c, 1);
}

}  // namespace
}  // namespace superyolo::train
