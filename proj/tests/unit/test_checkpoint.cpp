/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "superyolo/checkpoint.hpp"
#include "superyolo/config.hpp"
#include "superyolo/error.hpp"
#include "superyolo/trainer.hpp"

namespace superyolo::train {
namespace {

namespace fs = std::filesystem;

Checkpoint fixture() {
  Checkpoint c;
  c.config = config::defaults();
  c.epoch = 3;
  c.step = 17;
  c.metric_history = nlohmann::json::array({{{"epoch", 0}, {"l_total", 0.5}}});
  nn::Tensor<float> a({2, 3, 1, 1}), b({1, 1, 1, 1}, -0.25f);
  for (int i = 0; i < 6; ++i) a.data()[i] = 0.1f * i;
  c.weights = {{"backbone.0.conv.weight", a}, {"sr.decoder.0.bias", b}};
  c.optimizer = {{"backbone.0.conv.weight", a}};
  return c;
}

TEST(Checkpoint, ByteIdenticalRoundTrip) {
  const Checkpoint c = fixture();
  const std::string bytes = serialize_checkpoint(c);
  ASSERT_EQ(bytes.substr(0, 4), "SYCK");
  uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  EXPECT_EQ(version, kCheckpointVersion);
  const Checkpoint back = deserialize_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  EXPECT_EQ(back.step, 17);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.weights.at("sr.decoder.0.bias").item(), -0.25f);
  EXPECT_EQ(back.optimizer.size(), 1u);

  const fs::path path = fs::temp_directory_path() / "superyolo_ckpt_test.syck";
  save_checkpoint(path.string(), c);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(path.string())), bytes);
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST(Checkpoint, CorruptInputsRejected) {
  const std::string bytes = serialize_checkpoint(fixture());
  EXPECT_THROW(deserialize_checkpoint("XXXX" + bytes.substr(4)), IoError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), IoError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 10)), IoError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  EXPECT_THROW(deserialize_checkpoint(wrong_version), IoError);
  EXPECT_THROW(load_checkpoint("/nonexistent/x.syck"), IoError);
}

TEST(Checkpoint, ExportStripsTrainingState) {
  const Checkpoint e = export_inference(fixture());
  EXPECT_EQ(e.weights.count("sr.decoder.0.bias"), 0u);
  EXPECT_EQ(e.weights.count("backbone.0.conv.weight"), 1u);
  EXPECT_TRUE(e.optimizer.empty());
  EXPECT_FALSE(e.config["model"]["sr_enabled"].get<bool>());
}

TEST(Checkpoint, ModelStateRoundTrip) {
  config::Json cfg = config::defaults();
  config::apply_override(cfg, "model.width_multiple=0.125");
  config::apply_override(cfg, "model.n_classes=2");
  const auto net = std::make_unique<model::SuperYolo<float>>(config::to_model_config(cfg));
  const Checkpoint c = make_checkpoint(*net, cfg);
  const auto rebuilt = build_model(deserialize_checkpoint(serialize_checkpoint(c)));
  const auto a = net->state_dict(), b = rebuilt->state_dict();
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, t] : a) {
    ASSERT_EQ(b.count(name), 1u) << name;
    EXPECT_EQ(std::memcmp(t.data(), b.at(name).data(), sizeof(float) * t.numel()), 0) << name;
  }
  EXPECT_FALSE(rebuilt->training());
}

}  // namespace
}  // namespace superyolo::train
