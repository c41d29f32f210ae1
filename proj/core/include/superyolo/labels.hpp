/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace superyolo::data {

/// YOLO-format box: class id plus center/size as fractions of the image.
struct BoundingBoxLabel {
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBoxLabel&, const BoundingBoxLabel&) = default;
};

/// Parses "class cx cy w h" lines. Blank lines are ignored. Throws
/// ParseError (with 1-based line number) on wrong arity, non-numeric tokens,
/// negative or out-of-range class ids, coordinates outside [0, 1], or
/// non-positive sizes.
std::vector<BoundingBoxLabel> parse_label_file(std::string_view text,
                                               std::optional<int> n_classes = std::nullopt);

/// One line per label. Floats use the shortest representation that reads
/// back to the same double, so parse(serialize(x)) == x.
std::string serialize_labels(const std::vector<BoundingBoxLabel>& labels);

std::vector<BoundingBoxLabel> read_label_file(const std::string& path, std::optional<int> n_classes = std::nullopt);
void write_label_file(const std::string& path, const std::vector<BoundingBoxLabel>& labels);

/// Shared text helpers.
std::vector<std::string_view> split_whitespace(std::string_view line);
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_integer(std::string_view token);
std::string format_double(double v);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace superyolo::data
