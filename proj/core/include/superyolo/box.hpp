/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace superyolo::model {

/// Corner-format box.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return std::max(x2 - x1, 0.0); }
  double height() const { return std::max(y2 - y1, 0.0); }
  double area() const { return width() * height(); }
};

inline double iou(const Box& a, const Box& b) {
  const double iw = std::max(std::min(a.x2, b.x2) - std::max(a.x1, b.x1), 0.0);
  const double ih = std::max(std::min(a.y2, b.y2) - std::max(a.y1, b.y1), 0.0);
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Forward-mode dual number with N tangent directions.
template <int N>
struct Dual {
  double v = 0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  static Dual variable(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.v + b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r(a.v - b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r(a.v / b.v);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return r;
  }
  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
};

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
  return x.v;
}

inline double datan(double x) { return std::atan(x); }
template <int N>
Dual<N> datan(const Dual<N>& x) {
  Dual<N> r(std::atan(x.v));
  const double k = 1.0 / (1.0 + x.v * x.v);
  for (int i = 0; i < N; ++i) r.d[i] = k * x.d[i];
  return r;
}

template <typename S>
S dmax(const S& a, const S& b) {
  return value_of(a) >= value_of(b) ? a : b;
}
template <typename S>
S dmin(const S& a, const S& b) {
  return value_of(a) <= value_of(b) ? a : b;
}

/// Complete-IoU between a predicted and a target box, both in centre/size
/// form: IoU - rho^2 / c^2 - alpha * v, with v measuring the aspect-ratio
/// mismatch and alpha = v / (1 - IoU + v). Differentiated as written (alpha
/// included) when S is a dual number.
template <typename S>
S ciou(const S& px, const S& py, const S& pw, const S& ph, double tx, double ty, double tw, double th) {
  constexpr double eps = 1e-7;
  const S b1x1 = px - pw / S(2.0), b1x2 = px + pw / S(2.0);
  const S b1y1 = py - ph / S(2.0), b1y2 = py + ph / S(2.0);
  const double b2x1 = tx - tw / 2, b2x2 = tx + tw / 2, b2y1 = ty - th / 2, b2y2 = ty + th / 2;

  const S iw = dmax(dmin(b1x2, S(b2x2)) - dmax(b1x1, S(b2x1)), S(0.0));
  const S ih = dmax(dmin(b1y2, S(b2y2)) - dmax(b1y1, S(b2y1)), S(0.0));
  const S inter = iw * ih;
  const S h1 = ph + S(eps);
  const double h2 = th + eps;
  const S uni = pw * h1 + S(tw * h2) - inter + S(eps);
  const S i = inter / uni;

  const S cw = dmax(b1x2, S(b2x2)) - dmin(b1x1, S(b2x1));
  const S ch = dmax(b1y2, S(b2y2)) - dmin(b1y1, S(b2y1));
  const S c2 = cw * cw + ch * ch + S(eps);
  const S dx = S(b2x1 + b2x2) - b1x1 - b1x2;
  const S dy = S(b2y1 + b2y2) - b1y1 - b1y2;
  const S rho2 = (dx * dx + dy * dy) / S(4.0);
  const S dv = S(std::atan(tw / h2)) - datan(pw / h1);
  const S v = S(4.0 / (std::numbers::pi * std::numbers::pi)) * dv * dv;
  const S alpha = v / (v - i + S(1.0 + eps));
  return i - (rho2 / c2 + v * alpha);
}

}  // namespace superyolo::model
