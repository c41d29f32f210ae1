/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/loss.hpp"

#include <cmath>

#include "superyolo/box.hpp"
#include "superyolo/error.hpp"
#include "superyolo/ops.hpp"
#include "superyolo/postprocess.hpp"

namespace superyolo::model {

LossConfig LossConfig::defaults(int n_detectors, int n_classes) {
  LossConfig c;
  c.lambda_cls = 0.5 * n_classes / 80.0;
  c.layer_weights_a.assign(static_cast<size_t>(n_detectors), 1.0);
  c.layer_weights_c.assign(static_cast<size_t>(n_detectors), 1.0);
  c.layer_weights_b = n_detectors == 3 ? std::vector<double>{4.0, 1.0, 0.4} : std::vector<double>{1.0};
  return c;
}

void LossConfig::validate(int n_detectors) const {
  for (double v : {lambda_loc, lambda_obj, lambda_cls, c1, c2})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("loss weights must be finite and >= 0");
  for (const auto* w : {&layer_weights_a, &layer_weights_b, &layer_weights_c}) {
    if (static_cast<int>(w->size()) != n_detectors)
      throw ConfigError("loss layer weights must list one value per detector (" + std::to_string(n_detectors) + ")");
    for (double v : *w)
      if (!(v >= 0.0)) throw ConfigError("loss layer weights must be >= 0");
  }
  if (!(anchor_t > 1.0)) throw ConfigError("loss.anchor_t must be > 1");
  if (!(iou_ratio >= 0.0 && iou_ratio <= 1.0)) throw ConfigError("loss.iou_ratio must lie in [0, 1]");
}

std::vector<LayerTargets> assign_targets(const std::vector<std::vector<data::BoundingBoxLabel>>& labels,
                                         const HeadConfig& head, const std::vector<std::pair<int, int>>& grids,
                                         double anchor_t) {
  if (static_cast<int>(grids.size()) != head.n_detectors) throw ShapeError("assign_targets: one grid per detector");
  std::vector<LayerTargets> out;
  for (int l = 0; l < head.n_detectors; ++l) {
    LayerTargets lt;
    lt.grid_h = grids[l].first;
    lt.grid_w = grids[l].second;
    const auto anchors = head.grid_anchors(l);
    for (size_t b = 0; b < labels.size(); ++b)
      for (const auto& label : labels[b]) {
        if (!(label.w > 0 && label.h > 0)) throw RangeError("assign_targets: zero-area label");
        const double gx = label.cx * lt.grid_w, gy = label.cy * lt.grid_h;
        const double gw = label.w * lt.grid_w, gh = label.h * lt.grid_h;
        for (int a = 0; a < kAnchorsPerDetector; ++a) {
          const double r = std::max({gw / anchors[a].w, anchors[a].w / gw, gh / anchors[a].h, anchors[a].h / gh});
          if (!(r < anchor_t)) continue;
          const double fx = gx - std::floor(gx), fy = gy - std::floor(gy);
          std::vector<std::pair<int, int>> offsets{{0, 0}};
          if (fx < 0.5 && gx > 1.0) offsets.push_back({-1, 0});
          else if (fx > 0.5 && lt.grid_w - gx > 1.0) offsets.push_back({1, 0});
          if (fy < 0.5 && gy > 1.0) offsets.push_back({0, -1});
          else if (fy > 0.5 && lt.grid_h - gy > 1.0) offsets.push_back({0, 1});
          for (const auto& [ox, oy] : offsets) {
            const int ci = std::clamp(static_cast<int>(std::floor(gx)) + ox, 0, lt.grid_w - 1);
            const int cj = std::clamp(static_cast<int>(std::floor(gy)) + oy, 0, lt.grid_h - 1);
            lt.positives.push_back({static_cast<int>(b), a, ci, cj, gx - ci, gy - cj, gw, gh, label.class_id});
          }
        }
      }
    out.push_back(std::move(lt));
  }
  return out;
}

namespace {

using D4 = Dual<4>;

D4 dual_sigmoid(const D4& x) {
  const double s = sigmoid(x.v);
  D4 r(s);
  for (int i = 0; i < 4; ++i) r.d[i] = s * (1 - s) * x.d[i];
  return r;
}

}  // namespace

template <typename T>
nn::Var<T> detection_loss(const std::vector<nn::Var<T>>& raw, const std::vector<LayerTargets>& targets,
                          const HeadConfig& head, const LossConfig& cfg, LossBreakdown* breakdown) {
  const int L = head.n_detectors;
  if (static_cast<int>(raw.size()) != L || static_cast<int>(targets.size()) != L)
    throw ShapeError("detection_loss: expected one raw grid and one target set per detector");
  cfg.validate(L);
  const int no = head.outputs_per_anchor();
  const int nc = head.n_classes;

  bool need_grad = false;
  if (nn::grad_enabled())
    for (const auto& r : raw) need_grad = need_grad || r.requires_grad();

  LossBreakdown bd;
  std::vector<nn::Tensor<T>> grads;
  for (int l = 0; l < L; ++l) {
    const nn::Tensor<T>& R = raw[l].value();
    const nn::Shape s = R.shape();
    if (s.c != kAnchorsPerDetector * no) throw ShapeError("detection_loss: raw channel count mismatch");
    if (s.h != targets[l].grid_h || s.w != targets[l].grid_w) throw ShapeError("detection_loss: target grid mismatch");
    for (int64_t b = 0; b < s.n; ++b) {
      const T* p = R.data() + b * s.c * s.plane();
      for (int64_t i = 0; i < s.c * s.plane(); ++i)
        if (!std::isfinite(static_cast<double>(p[i])))
          throw DivergenceError("non-finite logits for image " + std::to_string(b) + " of the batch");
    }

    const double a_l = cfg.layer_weights_a[l], b_l = cfg.layer_weights_b[l], c_l = cfg.layer_weights_c[l];
    const auto anchors = head.grid_anchors(l);
    const auto& pos = targets[l].positives;
    const double n_pos = static_cast<double>(pos.size());
    const double n_cells = static_cast<double>(s.n) * kAnchorsPerDetector * s.plane();
    auto idx = [&](int b, int ch, int y, int x) { return ((static_cast<int64_t>(b) * s.c + ch) * s.h + y) * s.w + x; };
    auto cell = [&](int b, int a, int y, int x) { return ((static_cast<int64_t>(b) * kAnchorsPerDetector + a) * s.h + y) * s.w + x; };

    nn::Tensor<T> g;
    if (need_grad) g = nn::Tensor<T>(s);
    std::vector<double> tobj(static_cast<size_t>(n_cells), 0.0);
    std::vector<int> tobj_src(static_cast<size_t>(n_cells), -1);
    std::vector<double> ciou_v(pos.size());
    std::vector<std::array<double, 4>> ciou_d(pos.size());

    double loc = 0, cls = 0;
    for (size_t k = 0; k < pos.size(); ++k) {
      const CellTarget& t = pos[k];
      if (t.image < 0 || t.image >= s.n) throw ShapeError("detection_loss: target image index out of range");
      const int base = t.anchor * no;
      D4 logits[4];
      for (int j = 0; j < 4; ++j) logits[j] = D4::variable(R.data()[idx(t.image, base + j, t.gy, t.gx)], j);
      const D4 px = D4(2.0) * dual_sigmoid(logits[0]) - D4(0.5);
      const D4 py = D4(2.0) * dual_sigmoid(logits[1]) - D4(0.5);
      const D4 sw = D4(2.0) * dual_sigmoid(logits[2]);
      const D4 sh = D4(2.0) * dual_sigmoid(logits[3]);
      const D4 pw = sw * sw * D4(anchors[t.anchor].w);
      const D4 ph = sh * sh * D4(anchors[t.anchor].h);
      const D4 c = ciou(px, py, pw, ph, t.tx, t.ty, t.tw, t.th);
      ciou_v[k] = c.v;
      ciou_d[k] = c.d;
      loc += 1.0 - c.v;
      const int64_t ci = cell(t.image, t.anchor, t.gy, t.gx);
      tobj[ci] = (1.0 - cfg.iou_ratio) + cfg.iou_ratio * std::max(c.v, 0.0);
      tobj_src[ci] = static_cast<int>(k);
      for (int j = 0; j < nc; ++j) {
        const double x = R.data()[idx(t.image, base + 5 + j, t.gy, t.gx)];
        const double y = j == t.class_id ? 1.0 : 0.0;
        cls += bce_with_logits(x, y);
        if (need_grad)
          g.data()[idx(t.image, base + 5 + j, t.gy, t.gx)] +=
              static_cast<T>(cfg.lambda_cls * c_l * (sigmoid(x) - y) / (n_pos * nc));
      }
      if (need_grad)
        for (int j = 0; j < 4; ++j)
          g.data()[idx(t.image, base + j, t.gy, t.gx)] += static_cast<T>(-cfg.lambda_loc * a_l * c.d[j] / n_pos);
    }

    double obj = 0;
    for (int b = 0; b < s.n; ++b)
      for (int a = 0; a < kAnchorsPerDetector; ++a)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) {
            const int64_t ci = cell(b, a, y, x);
            const double v = R.data()[idx(b, a * no + 4, y, x)];
            obj += bce_with_logits(v, tobj[ci]);
            if (!need_grad) continue;
            g.data()[idx(b, a * no + 4, y, x)] += static_cast<T>(cfg.lambda_obj * b_l * (sigmoid(v) - tobj[ci]) / n_cells);
            const int k = tobj_src[ci];
            if (cfg.obj_iou_grad && k >= 0 && ciou_v[k] > 0.0) {
              // d BCE / d target = -logit; d target / d CIoU = iou_ratio.
              const double scale = cfg.lambda_obj * b_l * (-v) * cfg.iou_ratio / n_cells;
              const CellTarget& t = pos[k];
              for (int j = 0; j < 4; ++j)
                g.data()[idx(t.image, t.anchor * no + j, t.gy, t.gx)] += static_cast<T>(scale * ciou_d[k][j]);
            }
          }

    const double L_loc = n_pos > 0 ? loc / n_pos : 0.0;
    const double L_cls = n_pos > 0 ? cls / (n_pos * nc) : 0.0;
    const double L_obj = obj / n_cells;
    bd.l_loc += a_l * L_loc;
    bd.l_obj += b_l * L_obj;
    bd.l_cls += c_l * L_cls;
    bd.positives += static_cast<int>(pos.size());
    grads.push_back(std::move(g));
  }
  bd.lambda_loc = cfg.lambda_loc;
  bd.lambda_obj = cfg.lambda_obj;
  bd.lambda_cls = cfg.lambda_cls;
  bd.c1 = cfg.c1;
  bd.c2 = cfg.c2;
  bd.l_o = cfg.lambda_loc * bd.l_loc + cfg.lambda_obj * bd.l_obj + cfg.lambda_cls * bd.l_cls;
  if (breakdown) *breakdown = bd;

  nn::Tensor<T> value({1, 1, 1, 1}, static_cast<T>(bd.l_o));
  return nn::make_result<T>(std::move(value), raw, [grads = std::move(grads)](nn::Node<T>& node) {
    const T seed = node.grad.data()[0];
    for (size_t l = 0; l < node.inputs.size(); ++l) {
      auto& in = *node.inputs[l];
      if (!in.requires_grad) continue;
      T* dst = in.grad_buffer().data();
      const T* src = grads[l].data();
      for (int64_t i = 0; i < grads[l].numel(); ++i) dst[i] += seed * src[i];
    }
  });
}

template <typename T>
nn::Var<T> total_loss(const nn::Var<T>& l_o, const nn::Var<T>& l_s, const LossConfig& cfg, LossBreakdown* breakdown) {
  nn::Var<T> total = nn::scale(l_o, static_cast<T>(cfg.c1));
  if (l_s.defined()) total = nn::add(total, nn::scale(l_s, static_cast<T>(cfg.c2)));
  if (breakdown) {
    breakdown->c1 = cfg.c1;
    breakdown->c2 = cfg.c2;
    breakdown->l_s = l_s.defined() ? static_cast<double>(l_s.value().item()) : 0.0;
    breakdown->l_total = static_cast<double>(total.value().item());
  }
  return total;
}

template nn::Var<float> detection_loss(const std::vector<nn::Var<float>>&, const std::vector<LayerTargets>&,
                                       const HeadConfig&, const LossConfig&, LossBreakdown*);
template nn::Var<double> detection_loss(const std::vector<nn::Var<double>>&, const std::vector<LayerTargets>&,
                                        const HeadConfig&, const LossConfig&, LossBreakdown*);
template nn::Var<float> total_loss(const nn::Var<float>&, const nn::Var<float>&, const LossConfig&, LossBreakdown*);
template nn::Var<double> total_loss(const nn::Var<double>&, const nn::Var<double>&, const LossConfig&, LossBreakdown*);

}  // namespace superyolo::model
