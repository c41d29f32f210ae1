/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/complexity.hpp"

#include <cstdio>
#include <map>

#include "superyolo/flops.hpp"

namespace superyolo::metrics {

template <typename T>
int64_t count_params(const nn::Module<T>& module) {
  return module.parameter_count();
}

namespace {

template <typename T>
std::map<std::string, double> scoped_flops(const model::SuperYolo<T>& m, int h, int w, bool with_sr) {
  nn::FlopCounter counter;
  const nn::Var<T> rgb(nn::Tensor<T>::meta({1, 3, h, w}));
  const nn::Var<T> ir(nn::Tensor<T>::meta({1, 1, h, w}));
  m.forward(rgb, ir, with_sr);
  return counter.by_scope();
}

}  // namespace

template <typename T>
double count_flops(const model::SuperYolo<T>& m, int h, int w, bool with_sr) {
  double total = 0;
  for (const auto& [scope, flops] : scoped_flops(m, h, w, with_sr)) total += flops;
  return total;
}

template <typename T>
double count_gflops(const model::SuperYolo<T>& m, int h, int w, bool with_sr) {
  return count_flops(m, h, w, with_sr) * kReportedPerCountedFlop / 1e9;
}

template <typename T>
ComplexityReport complexity_report(const model::SuperYolo<T>& m, int h, int w, const std::string& name) {
  ComplexityReport r;
  r.model_name = name;
  r.input_h = h;
  r.input_w = w;
  const auto flops = scoped_flops(m, h, w, m.has_sr());
  std::map<std::string, int64_t> params;
  for (const auto& p : m.named_parameters()) params[p.name.substr(0, p.name.find('.'))] += p.var.value().numel();
  for (const char* part : {"fusion", "backbone", "head"}) {
    const auto f = flops.find(part);
    ModuleCost c{part, params[part], f == flops.end() ? 0.0 : f->second * kReportedPerCountedFlop / 1e9};
    r.total_params += c.params;
    r.gflops += c.gflops;
    r.breakdown.push_back(c);
  }
  r.training_only_params = params["sr"];
  if (const auto f = flops.find("sr"); f != flops.end()) r.training_only_gflops = f->second * kReportedPerCountedFlop / 1e9;
  return r;
}

std::string format_report(const std::vector<ComplexityReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %10s %12s %10s %10s %10s %14s\n", "model", "input", "Params(M)", "GFLOPs",
                "fusion", "backbone", "SR (train)");
  out += line;
  for (const auto& r : reports) {
    char input[32];
    std::snprintf(input, sizeof input, "%dx%d", r.input_w, r.input_h);
    std::snprintf(line, sizeof line, "%-22s %10s %12.4f %10.2f %10.3f %10.2f %8.4fM/%.1fG\n", r.model_name.c_str(), input,
                  r.total_params / 1e6, r.gflops, r.breakdown.at(0).gflops, r.breakdown.at(1).gflops,
                  r.training_only_params / 1e6, r.training_only_gflops);
    out += line;
  }
  return out;
}

std::string report_csv(const std::vector<ComplexityReport>& reports) {
  std::string out =
      "model,input_h,input_w,params,gflops,fusion_params,fusion_gflops,backbone_params,backbone_gflops,head_params,"
      "head_gflops,sr_params,sr_gflops\n";
  char line[512];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%lld,%.6f", r.model_name.c_str(), r.input_h, r.input_w,
                  static_cast<long long>(r.total_params), r.gflops);
    out += line;
    for (const auto& c : r.breakdown) {
      std::snprintf(line, sizeof line, ",%lld,%.6f", static_cast<long long>(c.params), c.gflops);
      out += line;
    }
    std::snprintf(line, sizeof line, ",%lld,%.6f\n", static_cast<long long>(r.training_only_params),
                  r.training_only_gflops);
    out += line;
  }
  return out;
}

template int64_t count_params(const nn::Module<float>&);
template int64_t count_params(const nn::Module<double>&);
template double count_flops(const model::SuperYolo<float>&, int, int, bool);
template double count_flops(const model::SuperYolo<double>&, int, int, bool);
template double count_gflops(const model::SuperYolo<float>&, int, int, bool);
template double count_gflops(const model::SuperYolo<double>&, int, int, bool);
template ComplexityReport complexity_report(const model::SuperYolo<float>&, int, int, const std::string&);
template ComplexityReport complexity_report(const model::SuperYolo<double>&, int, int, const std::string&);

}  // namespace superyolo::metrics
