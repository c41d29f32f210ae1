/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "superyolo/error.hpp"
#include "superyolo/labels.hpp"

namespace superyolo::model {

std::array<double, 4> decode_cell(const std::array<double, 4>& t, int gx, int gy, int stride, const Anchor& anchor) {
  const double sw = 2.0 * sigmoid(t[2]);
  const double sh = 2.0 * sigmoid(t[3]);
  return {(2.0 * sigmoid(t[0]) - 0.5 + gx) * stride, (2.0 * sigmoid(t[1]) - 0.5 + gy) * stride, sw * sw * anchor.w,
          sh * sh * anchor.h};
}

std::array<double, 4> encode_cell(const std::array<double, 4>& b, int gx, int gy, int stride, const Anchor& anchor) {
  const double ox = (b[0] / stride - gx + 0.5) / 2.0;
  const double oy = (b[1] / stride - gy + 0.5) / 2.0;
  const double rw = std::sqrt(b[2] / anchor.w) / 2.0;
  const double rh = std::sqrt(b[3] / anchor.h) / 2.0;
  for (double p : {ox, oy, rw, rh})
    if (!(p > 0.0 && p < 1.0)) throw RangeError("encode_cell: box is outside the reach of this cell and anchor");
  return {logit(ox), logit(oy), logit(rw), logit(rh)};
}

template <typename T>
std::vector<DetectionList> decode(const std::vector<nn::Tensor<T>>& raw, const HeadConfig& cfg, int image_h,
                                  int image_w, double conf_threshold) {
  if (static_cast<int>(raw.size()) != cfg.n_detectors) throw ShapeError("decode: detector count mismatch");
  const int no = cfg.outputs_per_anchor();
  const int64_t batch = raw.empty() ? 0 : raw[0].shape().n;
  std::vector<DetectionList> out(static_cast<size_t>(batch));
  for (int l = 0; l < cfg.n_detectors; ++l) {
    const nn::Tensor<T>& r = raw[l];
    if (r.shape().c != kAnchorsPerDetector * no) throw ShapeError("decode: raw channel count mismatch");
    const int H = static_cast<int>(r.shape().h), W = static_cast<int>(r.shape().w);
    const int stride = cfg.strides.at(l);
    for (int64_t b = 0; b < batch; ++b)
      for (int a = 0; a < kAnchorsPerDetector; ++a) {
        const Anchor& anchor = cfg.anchors.at(static_cast<size_t>(l * kAnchorsPerDetector + a));
        for (int gy = 0; gy < H; ++gy)
          for (int gx = 0; gx < W; ++gx) {
            const double obj = sigmoid(r.at(b, a * no + 4, gy, gx));
            if (obj <= conf_threshold) continue;
            int best = 0;
            double best_logit = r.at(b, a * no + 5, gy, gx);
            for (int c = 1; c < cfg.n_classes; ++c) {
              const double v = r.at(b, a * no + 5 + c, gy, gx);
              if (v > best_logit) best_logit = v, best = c;
            }
            const double score = obj * sigmoid(best_logit);
            if (score <= conf_threshold) continue;
            const auto xywh = decode_cell({static_cast<double>(r.at(b, a * no, gy, gx)),
                                           static_cast<double>(r.at(b, a * no + 1, gy, gx)),
                                           static_cast<double>(r.at(b, a * no + 2, gy, gx)),
                                           static_cast<double>(r.at(b, a * no + 3, gy, gx))},
                                          gx, gy, stride, anchor);
            Detection d{best, score,
                        std::clamp(xywh[0] - xywh[2] / 2, 0.0, static_cast<double>(image_w)),
                        std::clamp(xywh[1] - xywh[3] / 2, 0.0, static_cast<double>(image_h)),
                        std::clamp(xywh[0] + xywh[2] / 2, 0.0, static_cast<double>(image_w)),
                        std::clamp(xywh[1] + xywh[3] / 2, 0.0, static_cast<double>(image_h))};
            out[b].push_back(d);
          }
      }
  }
  for (auto& list : out)
    std::stable_sort(list.begin(), list.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

DetectionList nms(DetectionList dets, double iou_threshold, int max_detections) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  DetectionList kept;
  for (const Detection& d : dets) {
    if (static_cast<int>(kept.size()) >= max_detections) break;
    const Box box = d.box();
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == d.class_id && iou(k.box(), box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

template <typename T>
std::vector<DetectionList> postprocess(const std::vector<nn::Tensor<T>>& raw, const HeadConfig& cfg, int image_h,
                                       int image_w, double conf_threshold) {
  auto lists = decode(raw, cfg, image_h, image_w, conf_threshold);
  for (auto& l : lists) l = nms(std::move(l), cfg.nms_iou_threshold, cfg.max_detections);
  return lists;
}

std::string serialize_detections(const std::string& image_id, const DetectionList& dets) {
  std::string out;
  for (const auto& d : dets) {
    out += image_id + ' ' + std::to_string(d.class_id);
    for (double v : {d.score, d.x1, d.y1, d.x2, d.y2}) out += ' ' + data::format_double(v);
    out += '\n';
  }
  return out;
}

std::map<std::string, DetectionList> parse_detections(std::string_view text) {
  std::map<std::string, DetectionList> out;
  int line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    const std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    const auto tokens = data::split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 7) throw ParseError("expected 7 fields (image class score x1 y1 x2 y2)", line_no);
    const auto cls = data::parse_integer(tokens[1]);
    if (!cls || *cls < 0) throw ParseError("invalid class id '" + std::string(tokens[1]) + "'", line_no);
    double v[5];
    for (int k = 0; k < 5; ++k) {
      const auto d = data::parse_double(tokens[k + 2]);
      if (!d) throw ParseError("field '" + std::string(tokens[k + 2]) + "' is not a number", line_no);
      v[k] = *d;
    }
    out[std::string(tokens[0])].push_back({static_cast<int>(*cls), v[0], v[1], v[2], v[3], v[4]});
  }
  return out;
}

template std::vector<DetectionList> decode(const std::vector<nn::Tensor<float>>&, const HeadConfig&, int, int, double);
template std::vector<DetectionList> decode(const std::vector<nn::Tensor<double>>&, const HeadConfig&, int, int, double);
template std::vector<DetectionList> postprocess(const std::vector<nn::Tensor<float>>&, const HeadConfig&, int, int,
                                                double);
template std::vector<DetectionList> postprocess(const std::vector<nn::Tensor<double>>&, const HeadConfig&, int, int,
                                                double);

}  // namespace superyolo::model
