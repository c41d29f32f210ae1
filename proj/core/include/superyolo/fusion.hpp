/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "superyolo/layers.hpp"

namespace superyolo::model {

using nn::Shape;
using nn::Tensor;
using nn::Var;

enum class FusionKind { kMf, kConcat, kRgb, kIr };

std::string to_string(FusionKind kind);
FusionKind parse_fusion_kind(const std::string& name);

struct MfConfig {
  int se_reduction = 16;
  int out_channels = 32;  ///< equals the backbone stem width
  int rgb_in_channels = 3;
  int ir_in_channels = 1;
  /// Gate F_rgb with the IR-derived map and F_ir with the RGB-derived map.
  bool cross_gate = false;

  void validate() const;
};

/// Every intermediate of the pixel-level fusion.
template <typename T>
struct MfTrace {
  Var<T> f_rgb, f_ir;    ///< SE outputs
  Var<T> m_rgb, m_ir;    ///< single-channel spatial attention maps
  Var<T> f_in1, f_in2;   ///< gated features
  Var<T> f_ful1, f_ful2; ///< projected residual sums
  Var<T> f_o;            ///< SE over the concatenation
};

/// Pixel-level RGB/IR fusion:
///   F_rgb = SE(I_rgb), F_ir = SE(I_ir)
///   m_ir = f1(F_ir), m_rgb = f2(F_rgb)             (1x1 convs to one channel)
///   F_in1 = m_rgb * F_rgb, F_in2 = m_ir * F_ir
///   F_ful1 = f3(F_in1 + I_rgb), F_ful2 = f4(F_in2 + I_ir)
///   F_o = SE(concat(F_ful1, F_ful2))
template <typename T>
class MfFusion : public nn::Module<T> {
 public:
  MfFusion(const MfConfig& cfg, Rng& rng);
  Var<T> forward(const Var<T>& rgb, const Var<T>& ir, MfTrace<T>* trace = nullptr) const;

  const MfConfig& config() const { return cfg_; }
  nn::SqueezeExcite<T>& se_rgb() { return se_rgb_; }
  nn::SqueezeExcite<T>& se_ir() { return se_ir_; }
  nn::SqueezeExcite<T>& se_out() { return se_out_; }
  nn::Conv2d<T>& f1() { return f1_; }
  nn::Conv2d<T>& f2() { return f2_; }
  nn::Conv2d<T>& f3() { return f3_; }
  nn::Conv2d<T>& f4() { return f4_; }

 private:
  MfConfig cfg_;
  nn::SqueezeExcite<T> se_rgb_, se_ir_;
  nn::Conv2d<T> f1_, f2_, f3_, f4_;
  nn::SqueezeExcite<T> se_out_;
};

/// Parameter-free channel concatenation [rgb; ir].
template <typename T>
Var<T> concat_fuse(const Var<T>& rgb, const Var<T>& ir);

/// Input stage selected by `FusionKind`: MF, plain concatenation, or a single
/// modality passed through unchanged.
template <typename T>
class Fusion : public nn::Module<T> {
 public:
  Fusion(FusionKind kind, const MfConfig& mf, Rng& rng);
  Var<T> forward(const Var<T>& rgb, const Var<T>& ir, MfTrace<T>* trace = nullptr) const;

  FusionKind kind() const { return kind_; }
  int out_channels() const;
  MfFusion<T>* mf() { return mf_.get(); }

 private:
  FusionKind kind_;
  MfConfig mf_cfg_;
  std::unique_ptr<MfFusion<T>> mf_;
};

extern template class MfFusion<float>;
extern template class MfFusion<double>;
extern template class Fusion<float>;
extern template class Fusion<double>;

}  // namespace superyolo::model
