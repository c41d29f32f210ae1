/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>
#include <vector>

#include "superyolo/augment.hpp"
#include "superyolo/vedai.hpp"

namespace superyolo::data {

struct ManifestEntry {
  std::string id;
  std::string rgb;     ///< paths relative to the manifest directory or absolute
  std::string ir;
  std::string labels;
  std::string split;   ///< "train", "val", "test", ...

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// JSON dataset index. `ir_normalization` records how IR pixels are mapped
/// to [0, 1] ("bit_depth_max": divide by 255 or 65535 per source depth).
struct Manifest {
  int format_version = 1;
  std::string ir_normalization = "bit_depth_max";
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::string root;  ///< directory used to resolve relative paths (not serialized)

  int n_classes() const { return static_cast<int>(class_names.size()); }
  std::string resolve(const std::string& path) const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

/// Loads the samples of `split` ("" selects every entry). Images whose extent
/// differs from `hr_size` are bilinearly resized to hr_size x hr_size (labels
/// are normalized and unaffected); `resized` reports whether that happened.
std::vector<Sample> load_samples(const Manifest& manifest, const std::string& split, int hr_size,
                                 bool* resized = nullptr);

struct PrepareReport {
  ConversionStats stats;
  int images = 0;
  int missing_images = 0;
};

/// Converts VEDAI annotations (a directory of per-image files, or one
/// combined file whose rows start with the image id) into YOLO label files
/// under `out_dir/labels` plus `out_dir/manifest.json`. Image pairs are
/// expected as `<images_dir>/<id>_co.png` and `<id>_ir.png`; when absent the
/// extent falls back to `fallback_size`. The last `val_fraction` of the
/// id-sorted images form the "val" split.
PrepareReport prepare_vedai(const std::string& annotations, const std::string& images_dir, const std::string& out_dir,
                            int fallback_size, double val_fraction);

}  // namespace superyolo::data
