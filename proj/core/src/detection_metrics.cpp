/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/detection_metrics.hpp"

#include <algorithm>
#include <numeric>

#include "superyolo/error.hpp"

namespace superyolo::metrics {

std::vector<GroundTruth> to_ground_truth(const std::vector<data::BoundingBoxLabel>& labels, int image_h, int image_w) {
  std::vector<GroundTruth> out;
  out.reserve(labels.size());
  for (const auto& l : labels)
    out.push_back({l.class_id, {(l.cx - l.w / 2) * image_w, (l.cy - l.h / 2) * image_h, (l.cx + l.w / 2) * image_w,
                                (l.cy + l.h / 2) * image_h}});
  return out;
}

namespace {

std::vector<size_t> score_order(const DetectionList& dets) {
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

}  // namespace

ConfusionCounts match_detections(const DetectionList& dets, const std::vector<GroundTruth>& gts, double iou_threshold,
                                 std::vector<char>* is_tp) {
  std::vector<char> matched(gts.size(), 0);
  ConfusionCounts c;
  if (is_tp) is_tp->assign(dets.size(), 0);
  const auto order = score_order(dets);
  for (size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& d = dets[order[rank]];
    int best = -1;
    double best_iou = -1.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (matched[g] || gts[g].class_id != d.class_id) continue;
      const double v = model::iou(d.box(), gts[g].box);
      if (v > best_iou) best_iou = v, best = static_cast<int>(g);
    }
    if (best >= 0 && best_iou >= iou_threshold) {
      matched[best] = 1;
      ++c.tp;
      if (is_tp) (*is_tp)[rank] = 1;
    } else {
      ++c.fp;
    }
  }
  c.fn = static_cast<int64_t>(gts.size()) - c.tp;
  return c;
}

std::pair<double, double> precision_recall(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0) throw RangeError("precision_recall: negative count");
  const double p = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return {p, r};
}

double interpolated_ap(const std::vector<double>& recall, const std::vector<double>& precision) {
  if (recall.size() != precision.size()) throw ShapeError("interpolated_ap: curve length mismatch");
  // Suffix maximum gives the precision envelope.
  std::vector<double> envelope(precision);
  for (size_t i = envelope.size(); i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  double total = 0.0;
  size_t j = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (j < recall.size() && recall[j] < r) ++j;
    if (j < recall.size()) total += envelope[j];
  }
  return total / 101.0;
}

PrCurve average_precision(const std::vector<DetectionList>& dets, const std::vector<std::vector<GroundTruth>>& gts,
                          int class_id, double iou_threshold) {
  if (dets.size() != gts.size()) throw ShapeError("average_precision: one detection list per image expected");
  struct Scored {
    double score;
    char tp;
  };
  std::vector<Scored> pooled;
  PrCurve curve;
  curve.class_id = class_id;
  for (size_t i = 0; i < dets.size(); ++i) {
    DetectionList d;
    for (const auto& x : dets[i])
      if (x.class_id == class_id) d.push_back(x);
    std::vector<GroundTruth> g;
    for (const auto& x : gts[i])
      if (x.class_id == class_id) g.push_back(x);
    curve.n_gt += static_cast<int64_t>(g.size());
    std::vector<char> flags;
    match_detections(d, g, iou_threshold, &flags);
    const auto order = score_order(d);
    for (size_t rank = 0; rank < order.size(); ++rank) pooled.push_back({d[order[rank]].score, flags[rank]});
  }
  std::stable_sort(pooled.begin(), pooled.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  curve.n_det = static_cast<int64_t>(pooled.size());
  int64_t tp = 0, fp = 0;
  for (const auto& s : pooled) {
    (s.tp ? tp : fp) += 1;
    curve.recall.push_back(curve.n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(curve.n_gt) : 0.0);
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    curve.score.push_back(s.score);
  }
  curve.ap = curve.n_gt > 0 ? interpolated_ap(curve.recall, curve.precision) : 0.0;
  return curve;
}

EvaluationResult evaluate_detections(const std::vector<DetectionList>& dets,
                                     const std::vector<std::vector<GroundTruth>>& gts, int n_classes,
                                     double iou_threshold) {
  EvaluationResult r;
  double sum = 0;
  int included = 0;
  for (int c = 0; c < n_classes; ++c) {
    r.per_class.push_back(average_precision(dets, gts, c, iou_threshold));
    const bool use = r.per_class.back().n_gt > 0 || r.per_class.back().n_det > 0;
    r.included.push_back(use ? 1 : 0);
    if (use) sum += r.per_class.back().ap, ++included;
  }
  r.map = included > 0 ? sum / included : 0.0;
  for (size_t i = 0; i < dets.size(); ++i) r.counts += match_detections(dets[i], gts[i], iou_threshold);
  return r;
}

}  // namespace superyolo::metrics
