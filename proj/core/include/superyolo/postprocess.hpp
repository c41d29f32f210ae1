/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "superyolo/box.hpp"
#include "superyolo/head.hpp"

namespace superyolo::model {

/// Decoded box in input-pixel coordinates.
struct Detection {
  int class_id = 0;
  double score = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  Box box() const { return {x1, y1, x2, y2}; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

using DetectionList = std::vector<Detection>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Per-cell decoding of one anchor:
///   x = (2 sigmoid(tx) - 0.5 + gx) * stride, w = (2 sigmoid(tw))^2 * anchor_w
/// Returns centre/size in pixels.
std::array<double, 4> decode_cell(const std::array<double, 4>& logits, int gx, int gy, int stride, const Anchor& anchor);

/// Inverse of decode_cell for a box whose centre lies within the cell's
/// reach and whose size is within 4x of the anchor.
std::array<double, 4> encode_cell(const std::array<double, 4>& cxcywh, int gx, int gy, int stride, const Anchor& anchor);

/// Decodes raw head grids into per-image detections with
/// score = sigmoid(obj) * max_c sigmoid(cls_c) > conf_threshold, boxes clipped
/// to the image, sorted by descending score (ties keep grid order).
template <typename T>
std::vector<DetectionList> decode(const std::vector<nn::Tensor<T>>& raw, const HeadConfig& cfg, int image_h,
                                  int image_w, double conf_threshold);

/// Greedy class-wise suppression: a box survives when no higher-scored
/// survivor of its class overlaps it by more than `iou_threshold`. Output
/// keeps descending score order and at most `max_detections` boxes.
DetectionList nms(DetectionList dets, double iou_threshold, int max_detections = 300);

/// decode followed by nms with the thresholds of `cfg` (conf overridable).
template <typename T>
std::vector<DetectionList> postprocess(const std::vector<nn::Tensor<T>>& raw, const HeadConfig& cfg, int image_h,
                                       int image_w, double conf_threshold);

/// "image_id class score x1 y1 x2 y2" lines.
std::string serialize_detections(const std::string& image_id, const DetectionList& dets);
/// Parses the serialized form, grouping by image id.
std::map<std::string, DetectionList> parse_detections(std::string_view text);

}  // namespace superyolo::model
