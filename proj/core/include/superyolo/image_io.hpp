/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>

#include "superyolo/raster.hpp"

namespace superyolo::data {

/// Decodes an 8- or 16-bit PNG/JPEG. Colour images come back in RGB order;
/// alpha is dropped. Throws IoError when the file cannot be decoded.
IntRaster read_image(const std::string& path);

/// Reads and normalizes an aligned pair. Single-channel RGB sources are
/// rejected; 3-channel IR sources are reduced to luminance.
ImagePair read_pair(const std::string& rgb_path, const std::string& ir_path, const std::string& id);

/// Extent without decoding the pixels as float.
void image_extent(const std::string& path, int& height, int& width);

/// Writes an 8-bit PNG (values clamped to [0, 1] and rounded).
void write_png(const std::string& path, const Raster& image);

}  // namespace superyolo::data
