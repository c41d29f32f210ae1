/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "superyolo/layers.hpp"

namespace superyolo::model {

using nn::Shape;
using nn::Tensor;
using nn::Var;

enum class EncoderKind { kPlain, kEdsr };
enum class SrLossKind { kL1, kL2 };
enum class SrTarget { kRgb, kIr };

std::string to_string(EncoderKind kind);
std::string to_string(SrLossKind kind);
std::string to_string(SrTarget target);
EncoderKind parse_encoder_kind(const std::string& name);
SrLossKind parse_sr_loss_kind(const std::string& name);
SrTarget parse_sr_target(const std::string& name);

struct SrConfig {
  EncoderKind encoder_kind = EncoderKind::kPlain;
  int cr_width = 64;       ///< CR applied to the low-level tap
  int encoder_width = 128; ///< encoder output / decoder input channels
  int edsr_n_resblocks = 8;
  int edsr_width = 64;
  double edsr_res_scale = 1.0;
  std::vector<int> decoder_widths{64, 32};  ///< hidden widths of the 3-stage decoder
  SrLossKind loss_kind = SrLossKind::kL1;
  SrTarget target = SrTarget::kRgb;

  int output_channels() const { return target == SrTarget::kRgb ? 3 : 1; }
  void validate() const;
};

/// Encoder merging the low- and high-level backbone taps, followed by three
/// stride-2 transposed convolutions (x8 from the low-level grid).
template <typename T>
class SrBranch : public nn::Module<T> {
 public:
  /// `upsample` is the stride ratio between the high and low taps.
  SrBranch(const SrConfig& cfg, int low_channels, int high_channels, int upsample, Rng& rng);

  Var<T> encode(const Var<T>& low, const Var<T>& high) const;
  Var<T> decode(const Var<T>& feature) const;
  Var<T> forward(const Var<T>& low, const Var<T>& high) const { return decode(encode(low, high)); }

  const SrConfig& config() const { return cfg_; }
  int upsample() const { return upsample_; }
  int64_t encoder_parameter_count() const;

 private:
  SrConfig cfg_;
  int upsample_;
  nn::ConvRelu<T> cr1_;
  // plain encoder
  std::unique_ptr<nn::ConvRelu<T>> cr2_, cr3_;
  // EDSR encoder
  std::unique_ptr<nn::Conv2d<T>> edsr_head_, edsr_tail_;
  std::vector<std::unique_ptr<nn::ResBlock<T>>> resblocks_;
  std::vector<std::unique_ptr<nn::ConvTranspose2d<T>>> deconvs_;
};

/// Mean absolute (L1) or mean squared (L2) reconstruction error.
template <typename T>
Var<T> sr_loss(const Var<T>& sr, const Tensor<T>& target, SrLossKind kind);

extern template class SrBranch<float>;
extern template class SrBranch<double>;

}  // namespace superyolo::model
