/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/labels.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "superyolo/error.hpp"

namespace superyolo::data {

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<BoundingBoxLabel> parse_label_file(std::string_view text, std::optional<int> n_classes) {
  std::vector<BoundingBoxLabel> out;
  int line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 5)
      throw ParseError("expected 5 fields (class cx cy w h), found " + std::to_string(tokens.size()), line_no);
    const auto cls = parse_integer(tokens[0]);
    if (!cls) throw ParseError("class id '" + std::string(tokens[0]) + "' is not an integer", line_no);
    if (*cls < 0 || (n_classes && *cls >= *n_classes))
      throw ParseError("class id " + std::to_string(*cls) + " out of range", line_no);
    double v[4];
    for (int k = 0; k < 4; ++k) {
      const auto d = parse_double(tokens[k + 1]);
      if (!d) throw ParseError("field '" + std::string(tokens[k + 1]) + "' is not a number", line_no);
      if (*d < 0.0 || *d > 1.0) throw ParseError("value " + std::string(tokens[k + 1]) + " outside [0, 1]", line_no);
      v[k] = *d;
    }
    if (v[2] <= 0.0 || v[3] <= 0.0) throw ParseError("box width and height must be positive", line_no);
    out.push_back({static_cast<int>(*cls), v[0], v[1], v[2], v[3]});
  }
  return out;
}

std::string serialize_labels(const std::vector<BoundingBoxLabel>& labels) {
  std::string out;
  for (const auto& l : labels) {
    out += std::to_string(l.class_id);
    for (double v : {l.cx, l.cy, l.w, l.h}) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<BoundingBoxLabel> read_label_file(const std::string& path, std::optional<int> n_classes) {
  try {
    return parse_label_file(read_text_file(path), n_classes);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path);
  }
}

void write_label_file(const std::string& path, const std::vector<BoundingBoxLabel>& labels) {
  write_text_file(path, serialize_labels(labels));
}

}  // namespace superyolo::data
