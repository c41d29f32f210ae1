/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "superyolo/labels.hpp"

namespace superyolo::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("superyolo_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Cli, SummarizeReportsParams) {
  const auto r = invoke({"summarize", "--preset", "yolov5s", "--size", "256"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("yolov5s"), std::string::npos);
  EXPECT_NE(r.out.find("7.08"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"detect", "--rgb", "a.png", "--ir", "b.png"}).code, kUsageError);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsageError);
  EXPECT_EQ(invoke({"summarize", "--preset", "nope"}).code, kUsageError);
  const auto unknown = invoke({"summarize", "-s", "model.widht=1"});
  EXPECT_EQ(unknown.code, kUsageError);
  EXPECT_NE(unknown.err.find("model.widht"), std::string::npos);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  EXPECT_NE(invoke({"train", "--help"}).out.find("train.lr0"), std::string::npos);
}

TEST(Cli, MissingPathsFail) {
  const fs::path dir = fresh("missing");
  EXPECT_NE(invoke({"-o", dir.string(), "eval", "--checkpoint", (dir / "none.syck").string()}).code, kOk);
  EXPECT_NE(invoke({"prepare-data", "--mode", "vedai", "--annotations", (dir / "none.txt").string(), "--out",
                    (dir / "d").string()})
                .code,
            kOk);
  EXPECT_NE(invoke({"plot-pr", "--eval", (dir / "none.json").string()}).code, kOk);
}

TEST(Cli, PrepareVedaiReportsSkips) {
  const fs::path dir = fresh("vedai");
  data::write_text_file((dir / "ann.txt").string(),
                        "00000001 100 50 0.3 1 0 0 90 110 110 90 40 40 60 60\n"
                        "00000002 300 300 0.0 2 0 1 290 310 310 290 290 290 310 310\n"
                        "00000002 50 50 0.0 31 0 0 40 60 60 40 40 40 60 60\n");
  const auto r = invoke({"prepare-data", "--mode", "vedai", "--annotations", (dir / "ann.txt").string(), "--out",
                         (dir / "data").string(), "--val-fraction", "0"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("converted 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("skipped 1"), std::string::npos);
  EXPECT_NE(r.out.find("skipped class 31: 1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "data" / "manifest.json"));
}

TEST(Cli, EndToEndOnSyntheticData) {
  const fs::path dir = fresh("e2e");
  const std::string data = (dir / "data").string();
  ASSERT_EQ(invoke({"prepare-data", "--n-images", "4", "--size", "64", "--classes", "3", "--out", data}).code, kOk);
  const std::vector<std::string> sets{"-s", "data.manifest=" + data + "/manifest.json", "-s", "model.n_classes=3", "-s",
                                      "model.width_multiple=0.125", "-s", "train.image_size=32", "-s",
                                      "train.max_steps=2", "-s", "train.epochs=1", "-s", "data.val_split=train"};
  std::vector<std::string> train_args{"-o", (dir / "run").string(), "-q", "train"};
  train_args.insert(train_args.end(), sets.begin(), sets.end());
  const auto tr = invoke(train_args);
  ASSERT_EQ(tr.code, kOk) << tr.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "final.syck"));
  EXPECT_TRUE(fs::exists(dir / "run" / "checkpoints" / "last.syck"));
  EXPECT_TRUE(fs::exists(dir / "run" / "loss_history.csv"));

  const std::string ckpt = (dir / "run" / "final.syck").string();
  const auto ev = invoke({"-o", (dir / "eval").string(), "eval", "--checkpoint", ckpt});
  ASSERT_EQ(ev.code, kOk) << ev.err;
  EXPECT_NE(ev.out.find("mAP50"), std::string::npos);
  const auto report = nlohmann::json::parse(data::read_text_file((dir / "eval" / "eval.json").string()));
  EXPECT_EQ(report["classes"].size(), 3u);
  EXPECT_TRUE(report.contains("psnr"));

  const auto pl = invoke({"plot-pr", "--eval", (dir / "eval" / "eval.json").string(), "--out", (dir / "pr").string()});
  ASSERT_EQ(pl.code, kOk) << pl.err;
  for (const char* f : {"pr_class0.png", "pr_class1.png", "pr_class2.png", "pr_all.png"})
    EXPECT_GT(fs::file_size(dir / "pr" / f), 0u) << f;

  const auto ex = invoke({"export", "--checkpoint", ckpt, "--out", (dir / "inference.syck").string()});
  ASSERT_EQ(ex.code, kOk) << ex.err;
  EXPECT_LT(fs::file_size(dir / "inference.syck"), fs::file_size(ckpt));

  const auto de = invoke({"-o", (dir / "det").string(), "detect", "--checkpoint", (dir / "inference.syck").string(),
                          "--rgb", data + "/rgb/syn00000.png", "--ir", data + "/ir/syn00000.png", "--conf",
                          "0.0"});
  ASSERT_EQ(de.code, kOk) << de.err;
  EXPECT_TRUE(fs::exists(dir / "det" / "detections.txt"));

  const auto mismatch = invoke({"-o", (dir / "eval2").string(), "eval", "--checkpoint", ckpt, "-s",
                                "data.manifest=" + (dir / "none" / "manifest.json").string()});
  EXPECT_NE(mismatch.code, kOk);
}

}  // namespace
}  // namespace superyolo::cli
