/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "superyolo/augment.hpp"
#include "superyolo/checkpoint.hpp"
#include "superyolo/config.hpp"
#include "superyolo/detection_metrics.hpp"
#include "superyolo/model.hpp"
#include "superyolo/postprocess.hpp"

namespace superyolo::train {

/// Ratio between reconstruction targets and network inputs.
inline constexpr int kLrScale = 2;

struct StepRecord {
  int64_t step = 0;  ///< 1-based
  int epoch = 0;     ///< 0-based
  double lr = 0;
  model::LossBreakdown loss;
};

struct TrainOptions {
  /// Directory for last.syck (each checkpoint interval) and diverged.syck;
  /// empty keeps everything in memory.
  std::string checkpoint_dir;
  std::function<void(const StepRecord&)> on_step;
  /// Continue from this checkpoint (weights, momentum, epoch and history).
  const Checkpoint* resume = nullptr;
  /// Recorded in the metric history when the SR targets were upsampled.
  bool hr_synthesized = false;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepRecord> history;
};

/// Network inputs and targets of one step. `rgb`/`ir` are the 2x bilinear
/// reductions of the high-resolution pair; `target` is the high-resolution
/// modality selected by the SR configuration.
struct Batch {
  nn::Tensor<float> rgb;
  nn::Tensor<float> ir;
  nn::Tensor<float> target;
  std::vector<std::vector<data::BoundingBoxLabel>> labels;
  std::vector<std::string> ids;
};

Batch make_batch(const std::vector<const data::Sample*>& samples, model::SrTarget target);

/// Loads a manifest split at the reconstruction size (2 x train.image_size).
/// Sources of another extent are resized; unless data.synthesize_hr is set
/// that raises ConfigError. `n_classes` receives the manifest class count.
std::vector<data::Sample> load_dataset(const config::RunConfig& cfg, const std::string& split, int* n_classes = nullptr,
                                       bool* hr_synthesized = nullptr);

/// SGD training on high-resolution samples of extent 2 x train.image_size.
/// `cfg` is the full configuration tree; the returned checkpoint stores it
/// with model.anchors filled in. Throws DivergenceError on a non-finite loss.
TrainResult train(const config::Json& cfg, const std::vector<data::Sample>& dataset, const TrainOptions& options = {});

/// Rebuilds the network described by the checkpoint and loads its weights
/// (evaluation mode).
std::unique_ptr<model::SuperYolo<float>> build_model(const Checkpoint& ckpt);

Checkpoint make_checkpoint(const model::SuperYolo<float>& net, const config::Json& cfg);

/// Post-processed detections for network-resolution pairs, in input pixels.
std::vector<model::DetectionList> detect(model::SuperYolo<float>& net, const std::vector<data::ImagePair>& pairs,
                                         double conf_threshold, int batch_size = 4);

struct EvalReport {
  metrics::EvaluationResult detection;
  std::vector<std::string> image_ids;
  std::vector<model::DetectionList> detections;  ///< input-resolution pixels
  int input_h = 0;
  int input_w = 0;
  std::optional<double> psnr;  ///< mean over images, when the model has SR
  std::optional<double> ssim;
};

/// Evaluation with augmentation off and batch statistics frozen. Inputs are
/// the 2x reductions of `dataset`. Throws ConfigError when
/// `dataset_n_classes` differs from the checkpoint's class count.
EvalReport evaluate(const Checkpoint& ckpt, const std::vector<data::Sample>& dataset, int dataset_n_classes);
EvalReport evaluate(model::SuperYolo<float>& net, const std::vector<data::Sample>& dataset,
                    const config::RunConfig& cfg);

}  // namespace superyolo::train
