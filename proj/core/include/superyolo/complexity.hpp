/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "superyolo/model.hpp"

namespace superyolo::metrics {

/// Reported GFLOPs per counted FLOP. The counter tallies 2 per
/// multiply-accumulate plus per-element work; the reported figure is
/// multiply-accumulate based. Calibrated once against the Focus YOLOv5s
/// multimodal model at 512x512 and frozen.
inline constexpr double kReportedPerCountedFlop = 0.5;

struct ModuleCost {
  std::string name;
  int64_t params = 0;
  double gflops = 0.0;
};

struct ComplexityReport {
  std::string model_name;
  int input_h = 0;
  int input_w = 0;
  int64_t total_params = 0;  ///< inference graph (fusion + backbone + head)
  double gflops = 0.0;       ///< inference forward pass, reported units
  std::vector<ModuleCost> breakdown;  ///< sums to the totals
  int64_t training_only_params = 0;   ///< SR branch
  double training_only_gflops = 0.0;
};

template <typename T>
int64_t count_params(const nn::Module<T>& module);

/// Raw counted FLOPs of one forward pass on a 1 x C x h x w input, measured
/// on shape-only tensors.
template <typename T>
double count_flops(const model::SuperYolo<T>& model, int h, int w, bool with_sr = false);

/// count_flops scaled to reported GFLOPs.
template <typename T>
double count_gflops(const model::SuperYolo<T>& model, int h, int w, bool with_sr = false);

template <typename T>
ComplexityReport complexity_report(const model::SuperYolo<T>& model, int h, int w, const std::string& name = "");

/// Aligned text table and CSV renderings.
std::string format_report(const std::vector<ComplexityReport>& reports);
std::string report_csv(const std::vector<ComplexityReport>& reports);

}  // namespace superyolo::metrics
