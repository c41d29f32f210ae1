/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/fusion.hpp"

#include "superyolo/error.hpp"
#include "superyolo/ops.hpp"

namespace superyolo::model {

std::string to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::kMf: return "mf";
    case FusionKind::kConcat: return "concat";
    case FusionKind::kRgb: return "rgb";
    case FusionKind::kIr: return "ir";
  }
  return "?";
}

FusionKind parse_fusion_kind(const std::string& name) {
  if (name == "mf") return FusionKind::kMf;
  if (name == "concat") return FusionKind::kConcat;
  if (name == "rgb") return FusionKind::kRgb;
  if (name == "ir") return FusionKind::kIr;
  throw ConfigError("unknown fusion kind '" + name + "' (expected mf, concat, rgb or ir)");
}

void MfConfig::validate() const {
  if (se_reduction < 1) throw ConfigError("fusion.se_reduction must be >= 1");
  if (out_channels < 2) throw ConfigError("fusion.out_channels must be >= 2");
  if (rgb_in_channels != 3 || ir_in_channels != 1) throw ConfigError("fusion expects 3-channel RGB and 1-channel IR");
}

namespace {

const MfConfig& checked(const MfConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

template <typename T>
MfFusion<T>::MfFusion(const MfConfig& cfg, Rng& rng)
    : cfg_(checked(cfg)),
      se_rgb_(cfg.rgb_in_channels, cfg.se_reduction, rng),
      se_ir_(cfg.ir_in_channels, cfg.se_reduction, rng),
      f1_(cfg.ir_in_channels, 1, 1, 1, 0, true, rng),
      f2_(cfg.rgb_in_channels, 1, 1, 1, 0, true, rng),
      f3_(cfg.rgb_in_channels, cfg.out_channels - cfg.out_channels / 2, 1, 1, 0, true, rng),
      f4_(cfg.ir_in_channels, cfg.out_channels / 2, 1, 1, 0, true, rng),
      se_out_(cfg.out_channels, cfg.se_reduction, rng) {
  this->register_module("se_rgb", se_rgb_);
  this->register_module("se_ir", se_ir_);
  this->register_module("f1", f1_);
  this->register_module("f2", f2_);
  this->register_module("f3", f3_);
  this->register_module("f4", f4_);
  this->register_module("se_out", se_out_);
}

template <typename T>
Var<T> MfFusion<T>::forward(const Var<T>& rgb, const Var<T>& ir, MfTrace<T>* trace) const {
  if (rgb.shape().c != cfg_.rgb_in_channels || ir.shape().c != cfg_.ir_in_channels)
    throw ShapeError("MF fusion: expected " + std::to_string(cfg_.rgb_in_channels) + "-channel RGB and " +
                     std::to_string(cfg_.ir_in_channels) + "-channel IR");
  if (rgb.shape().h != ir.shape().h || rgb.shape().w != ir.shape().w)
    throw ShapeError("MF fusion: RGB and IR extents differ");
  MfTrace<T> t;
  t.f_rgb = se_rgb_.forward(rgb);
  t.f_ir = se_ir_.forward(ir);
  t.m_ir = f1_.forward(t.f_ir);
  t.m_rgb = f2_.forward(t.f_rgb);
  t.f_in1 = nn::mul(cfg_.cross_gate ? t.m_ir : t.m_rgb, t.f_rgb);
  t.f_in2 = nn::mul(cfg_.cross_gate ? t.m_rgb : t.m_ir, t.f_ir);
  t.f_ful1 = f3_.forward(nn::add(t.f_in1, rgb));
  t.f_ful2 = f4_.forward(nn::add(t.f_in2, ir));
  t.f_o = se_out_.forward(nn::concat<T>({t.f_ful1, t.f_ful2}));
  if (trace) *trace = t;
  return t.f_o;
}

template <typename T>
Var<T> concat_fuse(const Var<T>& rgb, const Var<T>& ir) {
  if (rgb.shape().h != ir.shape().h || rgb.shape().w != ir.shape().w)
    throw ShapeError("concat_fuse: RGB and IR extents differ");
  return nn::concat<T>({rgb, ir});
}

template <typename T>
Fusion<T>::Fusion(FusionKind kind, const MfConfig& mf, Rng& rng) : kind_(kind), mf_cfg_(mf) {
  if (kind == FusionKind::kMf) {
    mf_ = std::make_unique<MfFusion<T>>(mf, rng);
    this->register_module("mf", *mf_);
  }
}

template <typename T>
int Fusion<T>::out_channels() const {
  switch (kind_) {
    case FusionKind::kMf: return mf_cfg_.out_channels;
    case FusionKind::kConcat: return 4;
    case FusionKind::kRgb: return 3;
    case FusionKind::kIr: return 1;
  }
  return 0;
}

template <typename T>
Var<T> Fusion<T>::forward(const Var<T>& rgb, const Var<T>& ir, MfTrace<T>* trace) const {
  switch (kind_) {
    case FusionKind::kMf: return mf_->forward(rgb, ir, trace);
    case FusionKind::kConcat: return concat_fuse(rgb, ir);
    case FusionKind::kRgb: return rgb;
    case FusionKind::kIr: return ir;
  }
  throw ConfigError("unhandled fusion kind");
}

template class MfFusion<float>;
template class MfFusion<double>;
template class Fusion<float>;
template class Fusion<double>;
template Var<float> concat_fuse(const Var<float>&, const Var<float>&);
template Var<double> concat_fuse(const Var<double>&, const Var<double>&);

}  // namespace superyolo::model
