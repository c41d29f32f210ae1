/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "plot.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "superyolo/error.hpp"

namespace superyolo::cli {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

const cv::Scalar kPalette[] = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44},  {40, 39, 214},  {189, 103, 148},
                               {75, 86, 140},  {194, 119, 227}, {127, 127, 127}, {34, 189, 188}, {207, 190, 23}};

cv::Point to_pixel(double r, double p) {
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  return {kLeft + static_cast<int>(std::lround(r * w)), kTop + static_cast<int>(std::lround((1.0 - p) * h))};
}

}  // namespace

void plot_pr(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series) {
  cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    cv::line(img, to_pixel(t, 0), to_pixel(t, 1), {230, 230, 230}, 1);
    cv::line(img, to_pixel(0, t), to_pixel(1, t), {230, 230, 230}, 1);
    if (i % 2 == 0) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%.1f", t);
      cv::putText(img, buf, to_pixel(t, 0) + cv::Point(-10, 18), font, 0.4, {0, 0, 0}, 1, cv::LINE_AA);
      cv::putText(img, buf, to_pixel(0, t) + cv::Point(-30, 4), font, 0.4, {0, 0, 0}, 1, cv::LINE_AA);
    }
  }
  cv::rectangle(img, to_pixel(0, 1), to_pixel(1, 0), {0, 0, 0}, 1);
  cv::putText(img, "recall", {kWidth / 2 - 20, kHeight - 12}, font, 0.5, {0, 0, 0}, 1, cv::LINE_AA);
  cv::putText(img, "precision", {4, kTop - 12}, font, 0.5, {0, 0, 0}, 1, cv::LINE_AA);
  cv::putText(img, title, {kLeft + 100, kTop - 14}, font, 0.55, {0, 0, 0}, 1, cv::LINE_AA);
  for (size_t s = 0; s < series.size(); ++s) {
    const cv::Scalar color = kPalette[s % std::size(kPalette)];
    std::vector<cv::Point> pts;
    for (size_t k = 0; k < series[s].recall.size(); ++k) pts.push_back(to_pixel(series[s].recall[k], series[s].precision[k]));
    if (pts.size() == 1) cv::circle(img, pts[0], 3, color, cv::FILLED, cv::LINE_AA);
    if (pts.size() > 1) cv::polylines(img, pts, false, color, 2, cv::LINE_AA);
    const cv::Point legend = to_pixel(0.02, 0.0) + cv::Point(0, -12 - 18 * static_cast<int>(series.size() - 1 - s));
    cv::line(img, legend + cv::Point(0, -4), legend + cv::Point(18, -4), color, 2);
    cv::putText(img, series[s].label, legend + cv::Point(24, 0), font, 0.45, {0, 0, 0}, 1, cv::LINE_AA);
  }
  if (!cv::imwrite(path, img)) throw IoError("cannot write " + path);
}

}  // namespace superyolo::cli
