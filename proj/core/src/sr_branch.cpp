/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/sr_branch.hpp"

#include "superyolo/error.hpp"
#include "superyolo/ops.hpp"

namespace superyolo::model {

std::string to_string(EncoderKind kind) { return kind == EncoderKind::kPlain ? "plain" : "edsr"; }
std::string to_string(SrLossKind kind) { return kind == SrLossKind::kL1 ? "l1" : "l2"; }
std::string to_string(SrTarget target) { return target == SrTarget::kRgb ? "rgb" : "ir"; }

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "plain") return EncoderKind::kPlain;
  if (name == "edsr") return EncoderKind::kEdsr;
  throw ConfigError("unknown SR encoder '" + name + "' (expected plain or edsr)");
}

SrLossKind parse_sr_loss_kind(const std::string& name) {
  if (name == "l1") return SrLossKind::kL1;
  if (name == "l2") return SrLossKind::kL2;
  throw ConfigError("unknown SR loss '" + name + "' (expected l1 or l2)");
}

SrTarget parse_sr_target(const std::string& name) {
  if (name == "rgb") return SrTarget::kRgb;
  if (name == "ir") return SrTarget::kIr;
  throw ConfigError("unknown SR target '" + name + "' (expected rgb or ir)");
}

void SrConfig::validate() const {
  if (cr_width < 1 || encoder_width < 1) throw ConfigError("sr widths must be positive");
  if (decoder_widths.size() != 2) throw ConfigError("sr.decoder_widths must list the 2 hidden widths of the 3 deconvolutions");
  for (int w : decoder_widths)
    if (w < 1) throw ConfigError("sr.decoder_widths must be positive");
  if (encoder_kind == EncoderKind::kEdsr && (edsr_n_resblocks < 0 || edsr_width < 1))
    throw ConfigError("sr.edsr_n_resblocks must be >= 0 and sr.edsr_width >= 1");
}

namespace {

const SrConfig& checked(const SrConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

template <typename T>
SrBranch<T>::SrBranch(const SrConfig& cfg, int low_channels, int high_channels, int upsample, Rng& rng)
    : cfg_(checked(cfg)), upsample_(upsample), cr1_(low_channels, cfg.cr_width, rng) {
  if (upsample < 1) throw ConfigError("SR encoder upsample factor must be >= 1");
  this->register_module("cr1", cr1_);
  const int merged = cfg.cr_width + high_channels;
  if (cfg.encoder_kind == EncoderKind::kPlain) {
    cr2_ = std::make_unique<nn::ConvRelu<T>>(merged, cfg.encoder_width, rng);
    cr3_ = std::make_unique<nn::ConvRelu<T>>(cfg.encoder_width, cfg.encoder_width, rng);
    this->register_module("cr2", *cr2_);
    this->register_module("cr3", *cr3_);
  } else {
    edsr_head_ = std::make_unique<nn::Conv2d<T>>(merged, cfg.edsr_width, 3, 1, 1, true, rng);
    this->register_module("edsr.head", *edsr_head_);
    for (int i = 0; i < cfg.edsr_n_resblocks; ++i) {
      resblocks_.push_back(std::make_unique<nn::ResBlock<T>>(cfg.edsr_width, cfg.edsr_res_scale, rng));
      this->register_module("edsr.body." + std::to_string(i), *resblocks_.back());
    }
    edsr_tail_ = std::make_unique<nn::Conv2d<T>>(cfg.edsr_width, cfg.encoder_width, 3, 1, 1, true, rng);
    this->register_module("edsr.tail", *edsr_tail_);
  }
  const int widths[4] = {cfg.encoder_width, cfg.decoder_widths[0], cfg.decoder_widths[1], cfg.output_channels()};
  for (int i = 0; i < 3; ++i) {
    deconvs_.push_back(std::make_unique<nn::ConvTranspose2d<T>>(widths[i], widths[i + 1], 4, 2, 1, true, rng));
    this->register_module("decoder." + std::to_string(i), *deconvs_.back());
  }
}

template <typename T>
Var<T> SrBranch<T>::encode(const Var<T>& low, const Var<T>& high) const {
  if (high.shape().h * upsample_ != low.shape().h || high.shape().w * upsample_ != low.shape().w)
    throw ShapeError("SR encoder: high-level tap " + to_string(high.shape()) + " times " + std::to_string(upsample_) +
                     " does not match low-level tap " + to_string(low.shape()));
  Var<T> merged = nn::concat<T>({cr1_.forward(low), upsample_ > 1 ? nn::upsample_nearest(high, upsample_) : high});
  if (cfg_.encoder_kind == EncoderKind::kPlain) return cr3_->forward(cr2_->forward(merged));
  Var<T> y = edsr_head_->forward(merged);
  for (const auto& block : resblocks_) y = block->forward(y);
  return edsr_tail_->forward(y);
}

template <typename T>
Var<T> SrBranch<T>::decode(const Var<T>& feature) const {
  Var<T> y = feature;
  for (size_t i = 0; i < deconvs_.size(); ++i) {
    y = deconvs_[i]->forward(y);
    if (i + 1 < deconvs_.size()) y = nn::relu(y);
  }
  return y;
}

template <typename T>
int64_t SrBranch<T>::encoder_parameter_count() const {
  int64_t total = 0;
  for (const auto& p : this->named_parameters())
    if (p.name.rfind("decoder.", 0) != 0) total += p.var.value().numel();
  return total;
}

template <typename T>
Var<T> sr_loss(const Var<T>& sr, const Tensor<T>& target, SrLossKind kind) {
  if (sr.shape() != target.shape())
    throw ShapeError("sr_loss: reconstruction " + to_string(sr.shape()) + " vs target " + to_string(target.shape()));
  return kind == SrLossKind::kL1 ? nn::l1_loss(sr, target) : nn::mse_loss(sr, target);
}

template class SrBranch<float>;
template class SrBranch<double>;
template Var<float> sr_loss(const Var<float>&, const Tensor<float>&, SrLossKind);
template Var<double> sr_loss(const Var<double>&, const Tensor<double>&, SrLossKind);

}  // namespace superyolo::model
