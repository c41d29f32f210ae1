/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>

#include "superyolo/error.hpp"
#include "superyolo/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace superyolo::data {

std::string Manifest::resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute() || root.empty()) return p.string();
  return (fs::path(root) / p).string();
}

Manifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0, path);
  }
  Manifest m;
  try {
    m.format_version = j.value("format_version", 1);
    if (m.format_version != 1) throw ParseError("unsupported manifest format_version", 0, path);
    m.ir_normalization = j.value("ir_normalization", std::string("bit_depth_max"));
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("id").get<std::string>(), e.at("rgb").get<std::string>(),
                           e.at("ir").get<std::string>(), e.at("labels").get<std::string>(),
                           e.value("split", std::string("train"))});
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0, path);
  }
  m.root = fs::absolute(fs::path(path)).parent_path().string();
  return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"id", e.id}, {"rgb", e.rgb}, {"ir", e.ir}, {"labels", e.labels}, {"split", e.split}});
  const json j{{"format_version", m.format_version},
               {"ir_normalization", m.ir_normalization},
               {"class_names", m.class_names},
               {"entries", entries}};
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<Sample> load_samples(const Manifest& manifest, const std::string& split, int hr_size, bool* resized) {
  std::vector<Sample> out;
  if (resized) *resized = false;
  for (const auto& e : manifest.entries) {
    if (!split.empty() && e.split != split) continue;
    Sample s{read_pair(manifest.resolve(e.rgb), manifest.resolve(e.ir), e.id),
             read_label_file(manifest.resolve(e.labels), manifest.n_classes())};
    if (hr_size > 0 && (s.pair.height() != hr_size || s.pair.width() != hr_size)) {
      s.pair.rgb = bilinear_resize(s.pair.rgb, hr_size, hr_size);
      s.pair.ir = bilinear_resize(s.pair.ir, hr_size, hr_size);
      if (resized) *resized = true;
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string find_image(const fs::path& dir, const std::string& id, const std::string& suffix) {
  for (const std::string& candidate : {id, std::string(std::max<int>(0, 8 - static_cast<int>(id.size())), '0') + id}) {
    const fs::path p = dir / (candidate + suffix + ".png");
    if (fs::exists(p)) return p.string();
  }
  return (dir / (id + suffix + ".png")).string();
}

}  // namespace

PrepareReport prepare_vedai(const std::string& annotations, const std::string& images_dir, const std::string& out_dir,
                            int fallback_size, double val_fraction) {
  if (!fs::exists(annotations)) throw IoError("annotation source '" + annotations + "' does not exist");
  if (!(val_fraction >= 0.0 && val_fraction <= 1.0)) throw ConfigError("val_fraction must lie in [0, 1]");

  std::map<std::string, std::vector<VedaiRecord>> by_image;
  auto parse = [](const fs::path& file) {
    try {
      return parse_vedai_annotations(read_text_file(file.string()));
    } catch (const ParseError& e) {
      throw ParseError(e.detail(), e.line(), file.string());
    }
  };
  if (fs::is_directory(annotations)) {
    for (const auto& entry : fs::directory_iterator(annotations)) {
      if (entry.path().extension() != ".txt") continue;
      auto& records = by_image[entry.path().stem().string()];
      for (auto& r : parse(entry.path())) records.push_back(std::move(r));
    }
  } else {
    for (auto& r : parse(annotations)) {
      if (r.image_id.empty()) throw ParseError("combined annotation rows must start with an image id", 0, annotations);
      by_image[r.image_id].push_back(std::move(r));
    }
  }

  fs::create_directories(fs::path(out_dir) / "labels");
  const auto& class_map = vedai_class_map();
  Manifest manifest;
  manifest.class_names = vedai_class_names();
  PrepareReport report;
  const int n_val = static_cast<int>(std::ceil(val_fraction * static_cast<double>(by_image.size())));
  const int first_val = static_cast<int>(by_image.size()) - n_val;
  int index = 0;
  for (const auto& [id, records] : by_image) {
    const std::string rgb = find_image(images_dir, id, "_co");
    const std::string ir = find_image(images_dir, id, "_ir");
    int h = fallback_size, w = fallback_size;
    if (fs::exists(rgb)) {
      image_extent(rgb, h, w);
    } else {
      ++report.missing_images;
    }
    std::vector<BoundingBoxLabel> labels;
    for (const auto& r : records) {
      const Conversion c = convert_vedai_record(r, class_map, w, h);
      report.stats.add(r, c);
      if (c.label) labels.push_back(*c.label);
    }
    const std::string label_rel = "labels/" + id + ".txt";
    write_label_file((fs::path(out_dir) / label_rel).string(), labels);
    manifest.entries.push_back({id, fs::absolute(rgb).string(), fs::absolute(ir).string(), label_rel,
                                index >= first_val ? "val" : "train"});
    ++index;
    ++report.images;
  }
  save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
  return report;
}

}  // namespace superyolo::data
