/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "superyolo/error.hpp"

namespace superyolo::data {

namespace {

cv::Mat load(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot decode image '" + path + "'");
  if (m.depth() != CV_8U && m.depth() != CV_16U) throw IoError("'" + path + "': only 8- and 16-bit images are supported");
  if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
  if (m.channels() == 3) cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
  if (m.channels() != 1 && m.channels() != 3) throw IoError("'" + path + "': unsupported channel count");
  return m;
}

IntRaster to_int_raster(const cv::Mat& m) {
  IntRaster r;
  r.channels = m.channels();
  r.height = m.rows;
  r.width = m.cols;
  r.max_value = m.depth() == CV_16U ? 65535 : 255;
  r.pixels.resize(static_cast<size_t>(r.channels) * r.height * r.width);
  const size_t plane = static_cast<size_t>(r.height) * r.width;
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      for (int c = 0; c < r.channels; ++c) {
        const int32_t v = m.depth() == CV_16U ? m.ptr<uint16_t>(y)[x * r.channels + c]
                                               : m.ptr<uint8_t>(y)[x * r.channels + c];
        r.pixels[c * plane + static_cast<size_t>(y) * r.width + x] = v;
      }
  return r;
}

}  // namespace

IntRaster read_image(const std::string& path) { return to_int_raster(load(path)); }

ImagePair read_pair(const std::string& rgb_path, const std::string& ir_path, const std::string& id) {
  cv::Mat rgb = load(rgb_path);
  if (rgb.channels() != 3) throw IoError("'" + rgb_path + "': RGB image must have 3 channels");
  cv::Mat ir = load(ir_path);
  if (ir.channels() == 3) cv::cvtColor(ir, ir, cv::COLOR_RGB2GRAY);
  ImagePair pair{normalize(to_int_raster(rgb)), normalize(to_int_raster(ir)), id};
  if (!pair.rgb.same_extent(pair.ir)) throw ShapeError("pair '" + id + "': RGB and IR extents differ");
  return pair;
}

void image_extent(const std::string& path, int& height, int& width) {
  const cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot decode image '" + path + "'");
  height = m.rows;
  width = m.cols;
}

void write_png(const std::string& path, const Raster& image) {
  if (image.channels != 1 && image.channels != 3) throw ShapeError("write_png: 1 or 3 channels expected");
  cv::Mat m(image.height, image.width, image.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        // Stored BGR for OpenCV.
        const int dst_c = image.channels == 3 ? 2 - c : 0;
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        m.ptr<uint8_t>(y)[x * image.channels + dst_c] = static_cast<uint8_t>(std::lround(v * 255.0f));
      }
  if (!cv::imwrite(path, m)) throw IoError("cannot write '" + path + "'");
}

}  // namespace superyolo::data
