/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superyolo/augment.hpp"
#include "superyolo/loss.hpp"
#include "superyolo/model.hpp"

namespace superyolo::config {

using Json = nlohmann::json;

enum class ValueType { kBool, kInt, kFloat, kString, kIntList, kFloatList };

std::string to_string(ValueType type);

/// One configurable leaf. A null default means "taken from the model preset"
/// (or another derived value); such keys also accept null explicitly.
struct SchemaEntry {
  std::string key;  ///< dotted path, e.g. "train.lr0"
  ValueType type;
  Json default_value;
  std::string help;
  std::vector<std::string> choices;  ///< allowed strings, empty = any
};

/// The single table behind defaults, validation, overrides and help text.
const std::vector<SchemaEntry>& schema();
const SchemaEntry* find_entry(const std::string& key);

/// Nested JSON object holding every schema default.
Json defaults();

/// Checks that every leaf of `cfg` is a schema key with a value of the right
/// type. Throws ConfigError naming the offending key path.
void validate(const Json& cfg);

/// Overlays `layer` onto `base` leaf by leaf after validating `layer`.
Json merge(Json base, const Json& layer);

/// Applies one "dotted.key=value" assignment. Values are parsed against the
/// key's type: booleans as true/false/1/0, lists as comma separated items or
/// a JSON array, "null" for derived keys.
void apply_override(Json& cfg, const std::string& assignment);

/// defaults < file (when `path` is non-empty) < overrides.
Json load(const std::string& path, const std::vector<std::string>& overrides);

Json get(const Json& cfg, const std::string& key);
void set(Json& cfg, const std::string& key, Json value);

/// One line per key: name, type, default and description.
std::string help_text();

struct TrainConfig {
  int epochs = 300;
  int batch_size = 2;
  double lr0 = 0.01;
  double lrf = 0.01;  ///< final learning rate as a fraction of lr0
  double momentum = 0.937;
  double weight_decay = 0.0005;
  bool nesterov = true;
  double warmup_epochs = 3.0;
  uint64_t seed = 0;
  int image_size = 512;  ///< network input; reconstruction targets are 2x
  int64_t max_steps = 0; ///< 0 = run every epoch
  int checkpoint_every = 1;
  int bn_recalibration_batches = 0;
  bool auto_anchor = true;
  bool sr_enabled = true;  ///< mirrors the resolved model
  std::string device = "cpu";
  int log_every = 10;

  void validate() const;
};

struct EvalConfig {
  double iou_threshold = 0.5;
  int batch_size = 4;
  double detect_conf_threshold = 0.25;
};

struct DataConfig {
  std::string manifest;
  std::string train_split = "train";
  std::string val_split = "val";
  /// Accept sources smaller than the reconstruction size by upsampling them
  /// (the reconstruction target then carries no extra detail).
  bool synthesize_hr = true;
};

struct RunConfig {
  model::ModelConfig model;
  model::LossConfig loss;
  TrainConfig train;
  data::AugmentationConfig augment;
  EvalConfig eval;
  DataConfig data;
};

/// Builds and validates typed settings from a (partial) config tree.
RunConfig to_run_config(const Json& cfg);
model::ModelConfig to_model_config(const Json& cfg);

/// Flattened anchor list (w0, h0, w1, h1, ...) as stored under model.anchors.
Json anchors_to_json(const std::vector<model::Anchor>& anchors);

}  // namespace superyolo::config
