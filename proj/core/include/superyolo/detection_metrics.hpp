/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "superyolo/labels.hpp"
#include "superyolo/postprocess.hpp"

namespace superyolo::metrics {

using model::Box;
using model::Detection;
using model::DetectionList;

struct GroundTruth {
  int class_id = 0;
  Box box;
};

/// Converts normalized labels to pixel boxes.
std::vector<GroundTruth> to_ground_truth(const std::vector<data::BoundingBoxLabel>& labels, int image_h, int image_w);

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Greedy matching in descending score order: each detection takes the
/// unmatched ground truth of its class with the highest IoU (lowest index on
/// ties) when that IoU reaches `iou_threshold`. `is_tp`, when given, receives
/// one flag per detection in the order of `dets` after a stable sort by score.
ConfusionCounts match_detections(const DetectionList& dets, const std::vector<GroundTruth>& gts, double iou_threshold,
                                 std::vector<char>* is_tp = nullptr);

/// p = tp / (tp + fp) and r = tp / (tp + fn); 0/0 yields p = 1 (nothing
/// predicted) and r = 1 (nothing to find).
std::pair<double, double> precision_recall(const ConfusionCounts& counts);

struct PrCurve {
  int class_id = 0;
  std::vector<double> recall;     ///< non-decreasing
  std::vector<double> precision;
  std::vector<double> score;      ///< confidence at each point
  int64_t n_gt = 0;
  int64_t n_det = 0;
  double ap = 0.0;
};

/// 101-point interpolated AP: mean over r in {0, 0.01, ..., 1} of the
/// largest precision attained at recall >= r (0 when recall never reaches r).
double interpolated_ap(const std::vector<double>& recall, const std::vector<double>& precision);

/// PR curve and AP of one class, pooling detections over images
/// (`dets[i]` and `gts[i]` belong to image i).
PrCurve average_precision(const std::vector<DetectionList>& dets, const std::vector<std::vector<GroundTruth>>& gts,
                          int class_id, double iou_threshold = 0.5);

struct EvaluationResult {
  std::vector<PrCurve> per_class;   ///< one per class id in [0, n_classes)
  std::vector<char> included;       ///< class counted in the mean
  double map = 0.0;                 ///< mean AP over included classes
  ConfusionCounts counts;           ///< over all classes at the given threshold
};

/// Per-class AP and mAP. Classes with neither ground truth nor detections are
/// excluded from the mean.
EvaluationResult evaluate_detections(const std::vector<DetectionList>& dets,
                                     const std::vector<std::vector<GroundTruth>>& gts, int n_classes,
                                     double iou_threshold = 0.5);

}  // namespace superyolo::metrics
