/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "superyolo/labels.hpp"

namespace superyolo::data {

/// One oriented vehicle annotation in source pixel coordinates.
struct VedaiRecord {
  std::string image_id;  ///< empty for per-image annotation files
  double center_x = 0.0;
  double center_y = 0.0;
  double orientation = 0.0;  ///< radians
  std::array<double, 4> corner_x{};
  std::array<double, 4> corner_y{};
  int raw_class_id = 0;
  bool cropped = false;
  bool occluded = false;
};

/// Source class id -> contiguous training id.
using ClassMap = std::map<int, int>;

/// The 8 retained classes in reporting order: car, pickup, camping, truck,
/// other, tractor, boat, van.
const ClassMap& vedai_class_map();
const std::vector<std::string>& vedai_class_names();

/// Parses annotation rows
///   cx cy orientation class cropped occluded x1 x2 x3 x4 y1 y2 y3 y4
/// optionally prefixed by an image id (combined annotation files carry 15
/// fields). Blank lines are skipped; malformed rows raise ParseError.
std::vector<VedaiRecord> parse_vedai_annotations(std::string_view text);

enum class ConversionOutcome { kConverted, kUnmappedClass, kDegenerate };

struct Conversion {
  ConversionOutcome outcome = ConversionOutcome::kConverted;
  std::optional<BoundingBoxLabel> label;
};

/// Axis-aligned hull of the four corners, clipped to the image and
/// normalized to center/size fractions.
Conversion convert_vedai_record(const VedaiRecord& record, const ClassMap& class_map, int img_w, int img_h);

struct ConversionStats {
  int converted = 0;
  int degenerate = 0;
  std::map<int, int> skipped_by_class;  ///< raw class id -> count

  int skipped_unmapped() const;
  void add(const VedaiRecord& record, const Conversion& c);
};

}  // namespace superyolo::data
