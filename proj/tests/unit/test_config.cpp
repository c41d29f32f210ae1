/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "superyolo/config.hpp"
#include "superyolo/error.hpp"

namespace superyolo::config {
namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsValidateAndCoverSchema) {
  const Json d = defaults();
  EXPECT_NO_THROW(validate(d));
  for (const auto& e : schema()) EXPECT_NO_THROW(get(d, e.key)) << e.key;
  EXPECT_EQ(get(d, "train.lr0").get<double>(), 0.01);
  EXPECT_EQ(get(d, "model.preset").get<std::string>(), "superyolo");
  EXPECT_TRUE(get(d, "model.anchors").is_null());
}

TEST(Config, UnknownKeyNamesPath) {
  Json cfg = defaults();
  cfg["train"]["lr"] = 0.1;
  EXPECT_NE(error_of([&] { validate(cfg); }).find("train.lr"), std::string::npos);
  Json c2 = defaults();
  EXPECT_NE(error_of([&] { apply_override(c2, "model.widht_multiple=0.5"); }).find("model.widht_multiple"),
            std::string::npos);
}

TEST(Config, TypeErrorsNamePath) {
  Json cfg = defaults();
  cfg["train"]["epochs"] = "many";
  const std::string msg = error_of([&] { validate(cfg); });
  EXPECT_NE(msg.find("train.epochs"), std::string::npos);
  Json c2 = defaults();
  EXPECT_NE(error_of([&] { apply_override(c2, "model.fusion=sum"); }).find("model.fusion"), std::string::npos);
  EXPECT_NE(error_of([&] { apply_override(c2, "train.lr0"); }), "");
  Json c3 = defaults();
  c3["train"]["epochs"] = 2.5;
  EXPECT_NE(error_of([&] { validate(c3); }), "");
}

TEST(Config, OverridesParseTypes) {
  Json cfg = defaults();
  apply_override(cfg, "train.epochs=5");
  apply_override(cfg, "train.lr0=0.02");
  apply_override(cfg, "model.sr_enabled=false");
  apply_override(cfg, "model.anchors=[10,13,16,30,33,23]");
  apply_override(cfg, "train.lr0=1e-3");
  EXPECT_EQ(get(cfg, "train.epochs").get<int>(), 5);
  EXPECT_DOUBLE_EQ(get(cfg, "train.lr0").get<double>(), 1e-3);
  EXPECT_FALSE(get(cfg, "model.sr_enabled").get<bool>());
  EXPECT_EQ(get(cfg, "model.anchors").size(), 6u);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, PrecedenceDefaultsFileOverrides) {
  const auto path = std::filesystem::temp_directory_path() / "superyolo_cfg_test.json";
  std::ofstream(path) << R"({"train": {"epochs": 7, "lr0": 0.05}, "model": {"n_classes": 3}})";
  const Json cfg = load(path.string(), {"train.epochs=9"});
  EXPECT_EQ(get(cfg, "train.epochs").get<int>(), 9);
  EXPECT_DOUBLE_EQ(get(cfg, "train.lr0").get<double>(), 0.05);
  EXPECT_EQ(get(cfg, "model.n_classes").get<int>(), 3);
  EXPECT_EQ(get(cfg, "train.batch_size").get<int>(), 2);
  std::ofstream(path) << R"({"train": {"epochz": 7}})";
  EXPECT_THROW(load(path.string(), {}), ConfigError);
  EXPECT_THROW(load("/nonexistent/cfg.json", {}), IoError);
}

TEST(Config, RunConfigConversion) {
  Json cfg = defaults();
  apply_override(cfg, "model.n_classes=3");
  apply_override(cfg, "model.preset=yolov5s");
  const RunConfig rc = to_run_config(cfg);
  EXPECT_EQ(rc.model.head.n_classes, 3);
  EXPECT_EQ(rc.model.head.n_detectors, 3);
  EXPECT_FALSE(rc.model.sr_enabled);
  EXPECT_DOUBLE_EQ(rc.loss.lambda_cls, 0.5 * 3 / 80);
  EXPECT_EQ(rc.loss.layer_weights_b, (std::vector<double>{4.0, 1.0, 0.4}));
  Json one = defaults();
  apply_override(one, "model.n_detectors=3");
  EXPECT_EQ(to_model_config(one).head.anchors.size(), 9u);
  Json bad = defaults();
  apply_override(bad, "train.batch_size=0");
  EXPECT_THROW(to_run_config(bad), ConfigError);
}

TEST(Config, HelpListsEveryKey) {
  const std::string help = help_text();
  for (const auto& e : schema()) EXPECT_NE(help.find(e.key), std::string::npos) << e.key;
}

}  // namespace
}  // namespace superyolo::config
