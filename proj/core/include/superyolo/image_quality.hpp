/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <limits>
#include <span>

#include "superyolo/raster.hpp"

namespace superyolo::metrics {

/// Returned by psnr for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// Mean squared error accumulated in double precision.
template <typename T>
double mse(std::span<const T> a, std::span<const T> b);

/// 10 * log10(1 / mse) for signals with peak value 1.
template <typename T>
double psnr(std::span<const T> a, std::span<const T> b);
double psnr(const data::Raster& a, const data::Raster& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5) over the valid region,
/// C1 = 0.01^2, C2 = 0.03^2, averaged over channels. Both extents must be at
/// least 11.
double ssim(const data::Raster& a, const data::Raster& b);

}  // namespace superyolo::metrics
