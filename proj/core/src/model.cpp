/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/model.hpp"

#include "superyolo/error.hpp"
#include "superyolo/flops.hpp"
#include "superyolo/random.hpp"

namespace superyolo::model {

namespace {

// Cumulative output stride of each layer of the 10-layer backbone table.
int table_stride(const BackboneConfig& bb, int layer) {
  int s = bb.use_focus ? 2 : 1;
  for (int i = 1; i <= layer; ++i)
    if (i == 1 || i == 3 || i == 5 || i == 7) s *= 2;
  return s;
}

}  // namespace

ModelConfig ModelConfig::resolved() const {
  ModelConfig c = *this;
  c.mf.out_channels = c.backbone.stem_width();
  if (c.fusion == FusionKind::kMf) c.mf.validate();
  switch (c.fusion) {
    case FusionKind::kMf: c.backbone.in_channels = c.mf.out_channels; break;
    case FusionKind::kConcat: c.backbone.in_channels = 4; break;
    case FusionKind::kRgb: c.backbone.in_channels = 3; break;
    case FusionKind::kIr: c.backbone.in_channels = 1; break;
  }
  if (c.backbone.n_layers != 10) throw ConfigError("the detection head needs the full 10-layer backbone");
  c.backbone.validate();
  c.head.strides.clear();
  for (int l = 0; l < c.head.n_detectors; ++l) c.head.strides.push_back(table_stride(c.backbone, Backbone<float>::kPyramidLayers[l]));
  if (c.head.anchors.empty()) c.head.anchors = default_anchors(c.head.n_detectors);
  c.head.validate();
  if (c.sr_enabled) {
    c.sr.validate();
    const int low = table_stride(c.backbone, c.backbone.tap_low);
    if (low * kSrScale != 8)
      throw ConfigError("the SR decoder upsamples x8, so the low-level tap must sit at stride 4 (found stride " +
                        std::to_string(low) + ")");
  }
  return c;
}

ModelConfig preset(const std::string& name) {
  ModelConfig c;
  if (name == "superyolo") return c.resolved();
  if (name == "superyolo-concat") {
    c.fusion = FusionKind::kConcat;
    return c.resolved();
  }
  if (name == "superyolo-rgb") {
    c.fusion = FusionKind::kRgb;
    return c.resolved();
  }
  if (name == "superyolo-ir") {
    c.fusion = FusionKind::kIr;
    return c.resolved();
  }
  if (name == "superyolo-edsr") {
    c.sr.encoder_kind = EncoderKind::kEdsr;
    return c.resolved();
  }
  if (name == "superyolo-l2") {
    c.sr.loss_kind = SrLossKind::kL2;
    return c.resolved();
  }
  c.fusion = FusionKind::kConcat;
  c.head.n_detectors = 3;
  c.sr_enabled = false;
  if (name == "yolov5s") {
    c.backbone.use_focus = true;
    return c.resolved();
  }
  if (name == "yolov5s-nofocus") return c.resolved();
  if (name == "yolov5s-nofocus-mf") {
    c.fusion = FusionKind::kMf;
    return c.resolved();
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"superyolo",   "superyolo-concat", "superyolo-rgb",   "superyolo-ir",
          "superyolo-edsr", "superyolo-l2",  "yolov5s",         "yolov5s-nofocus",
          "yolov5s-nofocus-mf"};
}

template <typename T>
SuperYolo<T>::SuperYolo(const ModelConfig& cfg) : cfg_(cfg.resolved()) {
  // Independent streams per component so toggling one part leaves the
  // initialization of the others unchanged.
  Rng fusion_rng(Rng::derive(cfg_.init_seed, 1));
  Rng backbone_rng(Rng::derive(cfg_.init_seed, 2));
  Rng head_rng(Rng::derive(cfg_.init_seed, 3));
  Rng sr_rng(Rng::derive(cfg_.init_seed, 4));
  fusion_ = std::make_unique<Fusion<T>>(cfg_.fusion, cfg_.mf, fusion_rng);
  backbone_ = std::make_unique<Backbone<T>>(cfg_.backbone, backbone_rng);
  const std::array<int, 3> pyr{backbone_->channels(4), backbone_->channels(6), backbone_->channels(9)};
  head_ = std::make_unique<YoloHead<T>>(cfg_.head, cfg_.backbone, pyr, head_rng);
  this->register_module("fusion", *fusion_);
  this->register_module("backbone", *backbone_);
  this->register_module("head", *head_);
  if (cfg_.sr_enabled) {
    const int lo = cfg_.backbone.tap_low, hi = cfg_.backbone.tap_high;
    sr_ = std::make_unique<SrBranch<T>>(cfg_.sr, backbone_->channels(lo), backbone_->channels(hi),
                                        backbone_->stride(hi) / backbone_->stride(lo), sr_rng);
    this->register_module("sr", *sr_);
  }
}

template <typename T>
ModelOutput<T> SuperYolo<T>::forward(const Var<T>& rgb, const Var<T>& ir, bool with_sr, MfTrace<T>* trace) const {
  ModelOutput<T> out;
  Var<T> fused;
  {
    nn::FlopScope scope("fusion");
    fused = fusion_->forward(rgb, ir, trace);
  }
  {
    nn::FlopScope scope("backbone");
    out.taps = backbone_->forward(fused);
  }
  {
    nn::FlopScope scope("head");
    out.raw = head_->forward(out.taps.pyramid);
  }
  if (with_sr && sr_) {
    nn::FlopScope scope("sr");
    out.sr = sr_->forward(out.taps.low_level, out.taps.high_level);
  }
  return out;
}

template <typename T>
std::map<std::string, Tensor<T>> SuperYolo<T>::state_dict() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& p : this->named_parameters()) out.emplace(p.name, p.var.value());
  for (const auto& b : this->named_buffers()) out.emplace(b.name, *b.tensor);
  return out;
}

template <typename T>
void SuperYolo<T>::load_state_dict(const std::map<std::string, Tensor<T>>& state, bool strict) {
  size_t used = 0;
  auto assign = [&](const std::string& name, Tensor<T>& dst) {
    const auto it = state.find(name);
    if (it == state.end()) {
      if (strict) throw ConfigError("state is missing '" + name + "'");
      return;
    }
    if (it->second.shape() != dst.shape())
      throw ConfigError("shape mismatch for '" + name + "': " + to_string(it->second.shape()) + " vs " +
                        to_string(dst.shape()));
    dst = it->second;
    ++used;
  };
  for (auto& p : this->named_parameters()) {
    Var<T> v = p.var;
    assign(p.name, v.value());
  }
  for (auto& b : this->named_buffers()) assign(b.name, *b.tensor);
  if (strict && used != state.size()) {
    for (const auto& [name, t] : state) {
      bool known = false;
      for (const auto& p : this->named_parameters()) known = known || p.name == name;
      for (const auto& b : this->named_buffers()) known = known || b.name == name;
      if (!known) throw ConfigError("unexpected entry '" + name + "' in state");
    }
  }
}

template class SuperYolo<float>;
template class SuperYolo<double>;

}  // namespace superyolo::model
