/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "superyolo/tensor.hpp"

namespace superyolo::train {

/// Single-file container:
///
///   offset  size  content
///   0       4     magic "SYCK"
///   4       4     format version, uint32 little endian
///   8       8     manifest length M, uint64 little endian
///   16      M     UTF-8 JSON manifest
///   16 + M  ...   tensor payload, float32 little endian, row-major NCHW
///
/// Manifest keys: format_version, config (full run configuration), epoch,
/// step, metric_history, tensors (name, dtype "f32", shape [n,c,h,w], offset
/// and nbytes relative to the payload start) and optimizer (kind and the names
/// of its state tensors, stored under "optimizer.<parameter>").
struct Checkpoint {
  nlohmann::json config = nlohmann::json::object();
  int epoch = 0;
  int64_t step = 0;
  nlohmann::json metric_history = nlohmann::json::array();
  std::map<std::string, nn::Tensor<float>> weights;    ///< parameters and buffers
  std::map<std::string, nn::Tensor<float>> optimizer;  ///< momentum per parameter
};

inline constexpr uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& source = "checkpoint");

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Inference copy: drops "sr.*" weights and optimizer state and marks the
/// configuration as SR-free.
Checkpoint export_inference(const Checkpoint& ckpt);

}  // namespace superyolo::train
