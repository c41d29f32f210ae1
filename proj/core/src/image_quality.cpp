/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/image_quality.hpp"

#include <cmath>
#include <vector>

#include "superyolo/error.hpp"

namespace superyolo::metrics {

template <typename T>
double mse(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw ShapeError("mse: size mismatch");
  if (a.empty()) throw ShapeError("mse: empty input");
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

template <typename T>
double psnr(std::span<const T> a, std::span<const T> b) {
  const double e = mse(a, b);
  return e == 0.0 ? kPsnrIdentical : 10.0 * std::log10(1.0 / e);
}

double psnr(const data::Raster& a, const data::Raster& b) {
  if (a.channels != b.channels || !a.same_extent(b)) throw ShapeError("psnr: raster shapes differ");
  return psnr<float>(a.pixels, b.pixels);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

// Valid-region separable Gaussian filter of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w, const double* g) {
  const int oh = h - kWindow + 1, ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * plane[static_cast<size_t>(y) * w + x + k];
      rows[static_cast<size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * rows[static_cast<size_t>(y + k) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const data::Raster& a, const data::Raster& b) {
  if (a.channels != b.channels || !a.same_extent(b)) throw ShapeError("ssim: raster shapes differ");
  if (a.height < kWindow || a.width < kWindow) throw ShapeError("ssim: images must be at least 11x11");
  double g[kWindow];
  double norm = 0;
  for (int k = 0; k < kWindow; ++k) {
    const double d = k - kWindow / 2;
    g[k] = std::exp(-d * d / (2 * kSigma * kSigma));
    norm += g[k];
  }
  for (double& v : g) v /= norm;

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const int h = a.height, w = a.width;
  const size_t plane = static_cast<size_t>(h) * w;
  double total = 0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (size_t i = 0; i < plane; ++i) {
      x[i] = a.pixels[c * plane + i];
      y[i] = b.pixels[c * plane + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, g), my = filter_valid(y, h, w, g);
    const auto sxx = filter_valid(xx, h, w, g), syy = filter_valid(yy, h, w, g), sxy = filter_valid(xy, h, w, g);
    double sum = 0;
    for (size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cov = sxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels;
}

template double mse(std::span<const float>, std::span<const float>);
template double mse(std::span<const double>, std::span<const double>);
template double psnr(std::span<const float>, std::span<const float>);
template double psnr(std::span<const double>, std::span<const double>);

}  // namespace superyolo::metrics
