/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "superyolo/backbone.hpp"
#include "superyolo/fusion.hpp"
#include "superyolo/head.hpp"
#include "superyolo/sr_branch.hpp"

namespace superyolo::model {

/// Ratio between the reconstruction and the network input.
inline constexpr int kSrScale = 2;

struct ModelConfig {
  FusionKind fusion = FusionKind::kMf;
  MfConfig mf;
  BackboneConfig backbone;
  HeadConfig head;
  SrConfig sr;
  bool sr_enabled = true;
  uint64_t init_seed = 0;

  int n_classes() const { return head.n_classes; }
  /// Fills derived fields (fusion width, backbone input channels, head
  /// strides, default anchors) and validates the combination.
  ModelConfig resolved() const;
};

/// Named configurations:
///   superyolo          MF fusion, stride-1 stem, one detector, SR branch
///   superyolo-concat   as superyolo with concatenation fusion
///   superyolo-rgb/-ir  as superyolo with one modality
///   superyolo-edsr     EDSR encoder in the SR branch
///   superyolo-l2       L2 reconstruction loss
///   yolov5s            Focus stem, concatenation, three detectors, no SR
///   yolov5s-nofocus    yolov5s with the stride-1 stem
///   yolov5s-nofocus-mf yolov5s-nofocus with MF fusion
ModelConfig preset(const std::string& name);
std::vector<std::string> preset_names();

template <typename T>
struct ModelOutput {
  std::vector<Var<T>> raw;  ///< one grid per detector
  Var<T> sr;                ///< reconstruction, undefined without SR
  FeatureTaps<T> taps;
};

/// Full network: fusion -> backbone -> head, plus the optional SR branch fed
/// by the backbone taps. Parameters are namespaced "fusion.", "backbone.",
/// "head." and "sr.".
template <typename T>
class SuperYolo : public nn::Module<T> {
 public:
  explicit SuperYolo(const ModelConfig& cfg);

  /// `rgb` [N,3,h,w] and `ir` [N,1,h,w] at input resolution. The SR output
  /// (2h x 2w) is produced only when `with_sr` is set and the branch exists.
  ModelOutput<T> forward(const Var<T>& rgb, const Var<T>& ir, bool with_sr = false,
                         MfTrace<T>* trace = nullptr) const;

  const ModelConfig& config() const { return cfg_; }
  bool has_sr() const { return sr_ != nullptr; }
  Fusion<T>& fusion() { return *fusion_; }
  Backbone<T>& backbone() { return *backbone_; }
  YoloHead<T>& head() { return *head_; }
  SrBranch<T>* sr() { return sr_.get(); }

  /// Parameters and buffers by dotted name.
  std::map<std::string, Tensor<T>> state_dict() const;
  /// Copies matching entries. With `strict`, missing or unexpected names and
  /// shape mismatches raise ConfigError.
  void load_state_dict(const std::map<std::string, Tensor<T>>& state, bool strict = true);

 private:
  ModelConfig cfg_;
  std::unique_ptr<Fusion<T>> fusion_;
  std::unique_ptr<Backbone<T>> backbone_;
  std::unique_ptr<YoloHead<T>> head_;
  std::unique_ptr<SrBranch<T>> sr_;
};

extern template class SuperYolo<float>;
extern template class SuperYolo<double>;

}  // namespace superyolo::model
