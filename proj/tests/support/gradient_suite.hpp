/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <set>
#include <tuple>

#include "superyolo/backbone.hpp"
#include "superyolo/fusion.hpp"
#include "superyolo/loss.hpp"
#include "superyolo/ops.hpp"
#include "superyolo/sr_branch.hpp"
#include "test_support.hpp"

// Double-precision finite-difference fixtures shared by the unit tests and
// the acceptance runner.
namespace superyolo::testing {

using GradList = std::vector<std::pair<std::string, nn::Var<double>>>;

inline void randomize_parameters(nn::Module<double>& m, Rng& rng, double bound = 0.6) {
  for (auto& p : m.named_parameters()) p.var.value() = random_tensor<double>(p.var.value().shape(), rng, -bound, bound);
}

inline GradCheckResult mf_gradient_check(bool cross_gate) {
  Rng rng(22);
  model::MfConfig cfg;
  cfg.out_channels = 6;
  cfg.se_reduction = 2;
  cfg.cross_gate = cross_gate;
  model::MfFusion<double> mf(cfg, rng);
  randomize_parameters(mf, rng);
  nn::Var<double> rgb(random_tensor<double>({2, 3, 4, 4}, rng, 0, 1), true);
  nn::Var<double> ir(random_tensor<double>({2, 1, 4, 4}, rng, 0, 1), true);
  const auto target = random_tensor<double>({2, 6, 4, 4}, rng);
  GradList wrt{{"rgb", rgb}, {"ir", ir}};
  for (auto& p : mf.named_parameters()) wrt.emplace_back(p.name, p.var);
  return grad_check([&] { return nn::mse_loss(mf.forward(rgb, ir), target); }, wrt, 8);
}

inline model::BackboneConfig miniature_backbone(int in_channels) {
  model::BackboneConfig cfg;
  cfg.width_multiple = 0.0625;
  cfg.in_channels = in_channels;
  cfg.spp_kernels = {3, 5};
  return cfg;
}

inline GradCheckResult backbone_gradient_check() {
  Rng rng(35);
  model::Backbone<double> bb(miniature_backbone(2), rng);
  nn::Var<double> x(random_tensor<double>({2, 2, 16, 16}, rng), true);
  const auto taps0 = bb.forward(x);
  const auto t_low = random_tensor<double>(taps0.low_level.shape(), rng);
  const auto t_mid = random_tensor<double>(taps0.pyramid[1].shape(), rng);
  const auto t_high = random_tensor<double>(taps0.high_level.shape(), rng);
  GradList wrt{{"input", x}};
  for (auto& p : bb.named_parameters()) wrt.emplace_back(p.name, p.var);
  return grad_check(
      [&] {
        const auto t = bb.forward(x);
        return nn::add(nn::add(nn::mse_loss(t.low_level, t_low), nn::mse_loss(t.pyramid[1], t_mid)),
                       nn::mse_loss(t.high_level, t_high));
      },
      wrt, 4);
}

inline model::SrConfig tiny_sr(model::EncoderKind kind) {
  model::SrConfig cfg;
  cfg.encoder_kind = kind;
  cfg.cr_width = 4;
  cfg.encoder_width = 6;
  cfg.edsr_width = 5;
  cfg.edsr_n_resblocks = 2;
  cfg.decoder_widths = {4, 3};
  return cfg;
}

/// Fusion -> miniature backbone -> SR branch -> reconstruction loss.
inline GradCheckResult sr_pipeline_gradient_check(model::EncoderKind kind, model::SrLossKind loss_kind) {
  Rng rng(44);
  model::MfConfig mcfg;
  mcfg.out_channels = 4;
  mcfg.se_reduction = 2;
  model::MfFusion<double> mf(mcfg, rng);
  model::Backbone<double> bb(miniature_backbone(4), rng);
  model::SrBranch<double> sr(tiny_sr(kind), bb.channels(4), bb.channels(9), bb.stride(9) / bb.stride(4), rng);
  nn::Var<double> rgb(random_tensor<double>({2, 3, 16, 16}, rng, 0, 1), true);
  nn::Var<double> ir(random_tensor<double>({2, 1, 16, 16}, rng, 0, 1), true);
  // Target near the current output keeps the residual, and with it the
  // round-off in the loss, small relative to the parameter gradients.
  nn::Tensor<double> target;
  {
    nn::NoGradGuard guard;
    const auto taps = bb.forward(mf.forward(rgb, ir));
    target = sr.forward(taps.low_level, taps.high_level).value();
    // |residual| >= 0.01 keeps the L1 kink out of reach of the FD step.
    for (auto& v : target.values()) v += (rng.bernoulli(0.5) ? 1 : -1) * rng.uniform(0.01, 0.03);
  }
  auto loss = [&] {
    const auto taps = bb.forward(mf.forward(rgb, ir));
    return model::sr_loss(sr.forward(taps.low_level, taps.high_level), target, loss_kind);
  };
  GradList wrt{{"rgb", rgb}, {"ir", ir}};
  for (auto& p : mf.named_parameters()) wrt.emplace_back("fusion." + p.name, p.var);
  for (auto& p : bb.named_parameters())
    if (p.name.rfind("4.", 0) == 0 || p.name.rfind("9.", 0) == 0) wrt.emplace_back("backbone." + p.name, p.var);
  for (auto& p : sr.named_parameters()) wrt.emplace_back("sr." + p.name, p.var);
  return grad_check(loss, wrt, 3);
}

/// Random head output with six positives on distinct cells.
struct LossFixture {
  model::HeadConfig head;
  std::vector<model::LayerTargets> targets;
  nn::Tensor<double> raw;

  explicit LossFixture(uint64_t seed) {
    Rng rng(seed);
    head.n_classes = 3;
    head.anchors = {{4, 4}, {8, 6}, {12, 16}};
    head.strides = {4};
    raw = random_tensor<double>({2, 3 * head.outputs_per_anchor(), 4, 4}, rng, -1.5, 1.5);
    model::LayerTargets lt{4, 4, {}};
    std::set<std::tuple<int, int, int, int>> used;
    while (lt.positives.size() < 6) {
      model::CellTarget c{static_cast<int>(rng.integer(0, 1)), static_cast<int>(rng.integer(0, 2)),
                          static_cast<int>(rng.integer(0, 3)), static_cast<int>(rng.integer(0, 3)),
                          rng.uniform(-0.3, 1.3), rng.uniform(-0.3, 1.3), rng.uniform(0.5, 3), rng.uniform(0.5, 3),
                          static_cast<int>(rng.integer(0, 2))};
      if (used.insert({c.image, c.anchor, c.gx, c.gy}).second) lt.positives.push_back(c);
    }
    targets = {lt};
  }
};

/// Full derivative, including the objectness target's dependence on CIoU.
inline GradCheckResult detection_loss_gradient_check() {
  LossFixture f(64);
  model::LossConfig cfg = model::LossConfig::defaults(1, 3);
  cfg.obj_iou_grad = true;
  nn::Var<double> raw(f.raw, true);
  return grad_check([&] { return model::detection_loss<double>({raw}, f.targets, f.head, cfg); }, {{"raw", raw}},
                    static_cast<int>(f.raw.numel()));
}

/// Default (detached target) mode: every objectness and class logit checked
/// against finite differences; those logits never feed the target.
inline GradCheckResult detached_loss_gradient_check() {
  LossFixture f(65);
  const model::LossConfig cfg = model::LossConfig::defaults(1, 3);
  nn::Var<double> raw(f.raw, true);
  auto loss = [&] { return model::detection_loss<double>({raw}, f.targets, f.head, cfg); };
  raw.zero_grad();
  loss().backward();
  const nn::Tensor<double> g = raw.grad();
  const int no = f.head.outputs_per_anchor();
  double scale = 0;
  for (double v : g.values()) scale = std::max(scale, std::abs(v));
  GradCheckResult res;
  nn::NoGradGuard guard;
  for (int b = 0; b < 2; ++b)
    for (int ch = 0; ch < 3 * no; ++ch) {
      if (ch % no < 4) continue;
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
          double& p = raw.value().at(b, ch, y, x);
          const double orig = p;
          p = orig + 1e-6;
          const double up = loss().value().item();
          p = orig - 1e-6;
          const double dn = loss().value().item();
          p = orig;
          const double fd = (up - dn) / 2e-6, an = g.at(b, ch, y, x);
          const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-2 * scale});
          ++res.checked;
          if (err > res.worst) {
            res.worst = err;
            res.where = "raw[" + std::to_string(b) + "," + std::to_string(ch) + "," + std::to_string(y) + "," +
                        std::to_string(x) + "]";
          }
        }
    }
  return res;
}

}  // namespace superyolo::testing
