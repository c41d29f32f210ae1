/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/vedai.hpp"

#include <algorithm>

#include "superyolo/error.hpp"

namespace superyolo::data {

const ClassMap& vedai_class_map() {
  static const ClassMap map{{1, 0}, {11, 1}, {5, 2}, {2, 3}, {10, 4}, {4, 5}, {23, 6}, {9, 7}};
  return map;
}

const std::vector<std::string>& vedai_class_names() {
  static const std::vector<std::string> names{"car", "pickup", "camping", "truck", "other", "tractor", "boat", "van"};
  return names;
}

std::vector<VedaiRecord> parse_vedai_annotations(std::string_view text) {
  std::vector<VedaiRecord> out;
  int line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    VedaiRecord r;
    if (tokens.size() == 15) {
      r.image_id = std::string(tokens.front());
      tokens.erase(tokens.begin());
    } else if (tokens.size() != 14) {
      throw ParseError("expected 14 or 15 fields, found " + std::to_string(tokens.size()), line_no);
    }
    double v[14];
    for (int k = 0; k < 14; ++k) {
      const auto d = parse_double(tokens[k]);
      if (!d) throw ParseError("field '" + std::string(tokens[k]) + "' is not a number", line_no);
      v[k] = *d;
    }
    const auto cls = parse_integer(tokens[3]);
    if (!cls) throw ParseError("class id '" + std::string(tokens[3]) + "' is not an integer", line_no);
    r.center_x = v[0];
    r.center_y = v[1];
    r.orientation = v[2];
    r.raw_class_id = static_cast<int>(*cls);
    r.cropped = v[4] != 0.0;
    r.occluded = v[5] != 0.0;
    for (int k = 0; k < 4; ++k) {
      r.corner_x[k] = v[6 + k];
      r.corner_y[k] = v[10 + k];
    }
    out.push_back(std::move(r));
  }
  return out;
}

Conversion convert_vedai_record(const VedaiRecord& record, const ClassMap& class_map, int img_w, int img_h) {
  if (img_w <= 0 || img_h <= 0) throw RangeError("convert_vedai_record: image size must be positive");
  const auto it = class_map.find(record.raw_class_id);
  if (it == class_map.end()) return {ConversionOutcome::kUnmappedClass, std::nullopt};

  const auto [x0, x1] = std::minmax_element(record.corner_x.begin(), record.corner_x.end());
  const auto [y0, y1] = std::minmax_element(record.corner_y.begin(), record.corner_y.end());
  const double left = std::clamp(*x0 / img_w, 0.0, 1.0);
  const double right = std::clamp(*x1 / img_w, 0.0, 1.0);
  const double top = std::clamp(*y0 / img_h, 0.0, 1.0);
  const double bottom = std::clamp(*y1 / img_h, 0.0, 1.0);
  if (right <= left || bottom <= top) return {ConversionOutcome::kDegenerate, std::nullopt};

  BoundingBoxLabel label{it->second, (left + right) / 2, (top + bottom) / 2, right - left, bottom - top};
  return {ConversionOutcome::kConverted, label};
}

int ConversionStats::skipped_unmapped() const {
  int total = 0;
  for (const auto& [cls, n] : skipped_by_class) total += n;
  return total;
}

void ConversionStats::add(const VedaiRecord& record, const Conversion& c) {
  switch (c.outcome) {
    case ConversionOutcome::kConverted: ++converted; break;
    case ConversionOutcome::kUnmappedClass: ++skipped_by_class[record.raw_class_id]; break;
    case ConversionOutcome::kDegenerate: ++degenerate; break;
  }
}

}  // namespace superyolo::data
