/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>
#include <vector>

namespace superyolo::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> recall;
  std::vector<double> precision;
};

/// Renders precision over recall on unit axes and writes a PNG.
void plot_pr(const std::string& path, const std::string& title, const std::vector<PlotSeries>& series);

}  // namespace superyolo::cli
