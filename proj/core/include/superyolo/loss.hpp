/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <utility>
#include <vector>

#include "superyolo/head.hpp"
#include "superyolo/labels.hpp"

namespace superyolo::model {

struct LossConfig {
  double lambda_loc = 0.05;
  double lambda_obj = 1.0;
  double lambda_cls = 0.05;  ///< 0.5 * n_classes / 80
  std::vector<double> layer_weights_a;  ///< box term, one per detector
  std::vector<double> layer_weights_b;  ///< objectness term
  std::vector<double> layer_weights_c;  ///< class term
  double c1 = 1.0;  ///< detection weight in the total
  double c2 = 1.0;  ///< reconstruction weight in the total
  double anchor_t = 4.0;  ///< max size ratio between a box and a matched anchor
  double iou_ratio = 1.0; ///< objectness target = (1 - r) + r * clamp(CIoU, 0)
  /// Let the objectness term differentiate through its CIoU-dependent target.
  /// Off by default: the target is treated as a constant.
  bool obj_iou_grad = false;

  /// Reference weights: a = c = 1, b = (4, 1, 0.4) with three detectors and
  /// b = 1 with one; lambda_cls = 0.5 * n_classes / 80.
  static LossConfig defaults(int n_detectors, int n_classes);
  void validate(int n_detectors) const;
};

/// One positive cell. (tx, ty) is the target centre relative to the cell's
/// top-left corner and (tw, th) its size, all in grid units.
struct CellTarget {
  int image = 0;
  int anchor = 0;
  int gx = 0;
  int gy = 0;
  double tx = 0, ty = 0, tw = 0, th = 0;
  int class_id = 0;

  friend bool operator==(const CellTarget&, const CellTarget&) = default;
};

struct LayerTargets {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<CellTarget> positives;
};

/// Anchor-ratio matching with neighbour-cell expansion. A label matches an
/// anchor when max(w/aw, aw/w, h/ah, ah/h) < anchor_t. Each match marks the
/// containing cell plus the horizontally and vertically nearer neighbours
/// (when the centre lies strictly inside the nearer half and more than one
/// cell from the border), so at most three cells per label and anchor.
/// `labels[b]` lists the boxes of image b; `grids[l]` is (H, W) of detector l.
std::vector<LayerTargets> assign_targets(const std::vector<std::vector<data::BoundingBoxLabel>>& labels,
                                         const HeadConfig& head, const std::vector<std::pair<int, int>>& grids,
                                         double anchor_t);

struct LossBreakdown {
  double l_loc = 0;  ///< sum_l a_l * L_loc,l
  double l_obj = 0;  ///< sum_l b_l * L_obj,l
  double l_cls = 0;  ///< sum_l c_l * L_cls,l
  double l_o = 0;    ///< lambda_loc l_loc + lambda_obj l_obj + lambda_cls l_cls
  double l_s = 0;
  double l_total = 0;
  double lambda_loc = 0, lambda_obj = 0, lambda_cls = 0, c1 = 0, c2 = 0;
  int positives = 0;
};

/// Detection loss over raw head grids:
///   L_loc,l = mean over positives of (1 - CIoU)
///   L_obj,l = mean over all cells of BCE(obj, target)
///   L_cls,l = mean over positives and classes of BCE(cls, one-hot)
/// and l_o = lambda_loc sum a_l L_loc,l + lambda_obj sum b_l L_obj,l
///         + lambda_cls sum c_l L_cls,l.
/// Throws DivergenceError naming the image when a logit is not finite.
template <typename T>
nn::Var<T> detection_loss(const std::vector<nn::Var<T>>& raw, const std::vector<LayerTargets>& targets,
                          const HeadConfig& head, const LossConfig& cfg, LossBreakdown* breakdown = nullptr);

/// c1 * l_o + c2 * l_s; `l_s` may be undefined (no reconstruction branch).
template <typename T>
nn::Var<T> total_loss(const nn::Var<T>& l_o, const nn::Var<T>& l_s, const LossConfig& cfg,
                      LossBreakdown* breakdown = nullptr);

/// Numerically stable binary cross-entropy with logits.
inline double bce_with_logits(double x, double t) {
  return std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace superyolo::model
