/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/config.hpp"

#include <algorithm>
#include <sstream>

#include "superyolo/error.hpp"
#include "superyolo/labels.hpp"

namespace superyolo::config {

namespace {

using T = ValueType;

std::vector<SchemaEntry> build_schema() {
  const Json null;
  std::vector<std::string> presets = model::preset_names();
  return {
      // model
      {"model.preset", T::kString, "superyolo", "named architecture the model.* keys refine", presets},
      {"model.fusion", T::kString, null, "input fusion", {"mf", "concat", "rgb", "ir"}},
      {"model.cross_gate", T::kBool, null, "gate each modality with the map derived from the other one", {}},
      {"model.se_reduction", T::kInt, null, "SE hidden width divisor in the fusion module", {}},
      {"model.use_focus", T::kBool, null, "space-to-depth stem instead of the stride-1 stem", {}},
      {"model.depth_multiple", T::kFloat, null, "bottleneck repeat multiplier", {}},
      {"model.width_multiple", T::kFloat, null, "channel width multiplier", {}},
      {"model.spp_kernels", T::kIntList, null, "SPP max-pool kernel sizes", {}},
      {"model.tap_low", T::kInt, null, "backbone layer feeding the SR branch low-level input", {}},
      {"model.tap_high", T::kInt, null, "backbone layer feeding the SR branch high-level input", {}},
      {"model.n_detectors", T::kInt, null, "detection scales (1 or 3)", {}},
      {"model.n_classes", T::kInt, 8, "object classes", {}},
      {"model.anchors", T::kFloatList, null,
       "anchor sizes w0,h0,w1,h1,... in input pixels, 3 per detector (null: k-means at train start)", {}},
      {"model.sr_enabled", T::kBool, null, "attach the training-only super-resolution branch", {}},
      {"model.sr_encoder", T::kString, null, "SR encoder", {"plain", "edsr"}},
      {"model.sr_loss", T::kString, null, "SR reconstruction loss", {"l1", "l2"}},
      {"model.sr_target", T::kString, null, "modality reconstructed by the SR branch", {"rgb", "ir"}},
      {"model.sr_cr_width", T::kInt, null, "width of the CR unit on the low-level tap", {}},
      {"model.sr_encoder_width", T::kInt, null, "SR encoder output width", {}},
      {"model.sr_decoder_widths", T::kIntList, null, "hidden widths of the SR decoder stages", {}},
      {"model.edsr_resblocks", T::kInt, null, "residual blocks of the EDSR encoder", {}},
      {"model.edsr_width", T::kInt, null, "EDSR encoder width", {}},
      {"model.init_seed", T::kInt, 0, "weight initialization seed", {}},
      // head
      {"head.conf_threshold", T::kFloat, 0.001, "score threshold for evaluation", {}},
      {"head.nms_iou", T::kFloat, 0.6, "class-wise NMS IoU threshold", {}},
      {"head.max_detections", T::kInt, 300, "detections kept per image", {}},
      // loss
      {"loss.lambda_loc", T::kFloat, 0.05, "box loss weight", {}},
      {"loss.lambda_obj", T::kFloat, 1.0, "objectness loss weight", {}},
      {"loss.lambda_cls", T::kFloat, null, "class loss weight (null: 0.5 * n_classes / 80)", {}},
      {"loss.layer_weights_a", T::kFloatList, null, "per-detector box weights", {}},
      {"loss.layer_weights_b", T::kFloatList, null, "per-detector objectness weights", {}},
      {"loss.layer_weights_c", T::kFloatList, null, "per-detector class weights", {}},
      {"loss.c1", T::kFloat, 1.0, "detection loss weight in the total", {}},
      {"loss.c2", T::kFloat, 1.0, "reconstruction loss weight in the total", {}},
      {"loss.anchor_t", T::kFloat, 4.0, "max box/anchor size ratio for a positive", {}},
      {"loss.iou_ratio", T::kFloat, 1.0, "objectness target mix between 1 and CIoU", {}},
      {"loss.obj_iou_grad", T::kBool, false, "differentiate through the CIoU objectness target", {}},
      // train
      {"train.epochs", T::kInt, 300, "training epochs", {}},
      {"train.batch_size", T::kInt, 2, "images per step", {}},
      {"train.lr0", T::kFloat, 0.01, "initial learning rate", {}},
      {"train.lrf", T::kFloat, 0.01, "final learning rate as a fraction of lr0", {}},
      {"train.momentum", T::kFloat, 0.937, "SGD momentum", {}},
      {"train.weight_decay", T::kFloat, 0.0005, "L2 weight decay on convolution kernels", {}},
      {"train.nesterov", T::kBool, true, "Nesterov momentum", {}},
      {"train.warmup_epochs", T::kFloat, 3.0, "linear learning-rate warmup length", {}},
      {"train.seed", T::kInt, 0, "data order and augmentation seed", {}},
      {"train.image_size", T::kInt, 512, "network input size; SR targets are twice as large", {}},
      {"train.max_steps", T::kInt, 0, "stop after this many steps (0: no limit)", {}},
      {"train.checkpoint_every", T::kInt, 1, "epochs between checkpoints", {}},
      {"train.bn_recalibration_batches", T::kInt, 0,
       "after the last step, re-estimate batch-norm statistics as the average over this many training batches "
       "(0: keep the running averages)",
       {}},
      {"train.auto_anchor", T::kBool, true, "fit anchors by k-means when model.anchors is null", {}},
      {"train.device", T::kString, "cpu", "compute device", {"cpu"}},
      {"train.log_every", T::kInt, 10, "steps between progress lines", {}},
      // augmentation
      {"augment.enabled", T::kBool, true, "training augmentation", {}},
      {"augment.hsv_gains", T::kFloatList, Json::array({0.015, 0.7, 0.4}), "hue, saturation, value gains", {}},
      {"augment.flip_lr_prob", T::kFloat, 0.5, "left-right flip probability", {}},
      {"augment.translate_frac", T::kFloat, 0.1, "max translation as a fraction of the extent", {}},
      {"augment.scale_range", T::kFloatList, Json::array({0.5, 1.5}), "random scale range", {}},
      {"augment.mosaic_prob", T::kFloat, 1.0, "probability of a 4-image mosaic", {}},
      // eval
      {"eval.iou_threshold", T::kFloat, 0.5, "IoU for a true positive", {}},
      {"eval.batch_size", T::kInt, 4, "images per evaluation batch", {}},
      {"eval.detect_conf_threshold", T::kFloat, 0.25, "score threshold for the detect command", {}},
      // data
      {"data.manifest", T::kString, "", "dataset manifest.json", {}},
      {"data.train_split", T::kString, "train", "training split name", {}},
      {"data.val_split", T::kString, "val", "evaluation split name", {}},
      {"data.synthesize_hr", T::kBool, true, "upsample sources smaller than the SR target size", {}},
  };
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

bool is_int(const Json& v) { return v.is_number_integer(); }

void check_value(const SchemaEntry& e, const Json& v) {
  const auto bad = [&](const std::string& what) {
    throw ConfigError(e.key + ": expected " + what + ", got " + v.dump());
  };
  if (v.is_null()) {
    if (!e.default_value.is_null()) bad(to_string(e.type));
    return;
  }
  switch (e.type) {
    case T::kBool:
      if (!v.is_boolean()) bad("bool");
      break;
    case T::kInt:
      if (!is_int(v)) bad("int");
      break;
    case T::kFloat:
      if (!v.is_number()) bad("float");
      break;
    case T::kString:
      if (!v.is_string()) bad("string");
      if (!e.choices.empty() &&
          std::find(e.choices.begin(), e.choices.end(), v.get<std::string>()) == e.choices.end()) {
        std::string all;
        for (const auto& c : e.choices) all += (all.empty() ? "" : "|") + c;
        bad("one of " + all);
      }
      break;
    case T::kIntList:
      if (!v.is_array()) bad("list of int");
      for (const auto& x : v)
        if (!is_int(x)) bad("list of int");
      break;
    case T::kFloatList:
      if (!v.is_array()) bad("list of float");
      for (const auto& x : v)
        if (!x.is_number()) bad("list of float");
      break;
  }
}

void validate_node(const Json& node, const std::string& prefix) {
  if (!node.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + ": expected an object");
  for (const auto& [name, value] : node.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (const SchemaEntry* e = find_entry(key)) {
      check_value(*e, value);
      continue;
    }
    const bool is_section = std::any_of(schema().begin(), schema().end(),
                                        [&](const SchemaEntry& s) { return s.key.rfind(key + ".", 0) == 0; });
    if (!is_section) throw ConfigError(key + ": unknown key");
    validate_node(value, key);
  }
}

Json parse_scalar(const SchemaEntry& e, std::string_view text) {
  const auto bad = [&] {
    throw ConfigError(e.key + ": cannot parse '" + std::string(text) + "' as " + to_string(e.type));
  };
  switch (e.type) {
    case T::kBool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      bad();
      break;
    case T::kInt:
    case T::kIntList:
      if (const auto v = data::parse_integer(text)) return *v;
      bad();
      break;
    case T::kFloat:
    case T::kFloatList:
      if (const auto v = data::parse_double(text)) return *v;
      bad();
      break;
    case T::kString:
      return std::string(text);
  }
  return nullptr;
}

Json parse_value(const SchemaEntry& e, const std::string& text) {
  if (text == "null") return nullptr;
  const bool list = e.type == T::kIntList || e.type == T::kFloatList;
  if (!list) return parse_scalar(e, text);
  if (!text.empty() && text.front() == '[') {
    try {
      return Json::parse(text);
    } catch (const Json::exception&) {
      throw ConfigError(e.key + ": malformed list '" + text + "'");
    }
  }
  Json out = Json::array();
  if (text.empty()) return out;
  size_t start = 0;
  while (true) {
    const size_t comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    out.push_back(parse_scalar(e, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename V>
std::optional<V> opt(const Json& cfg, const std::string& key) {
  const Json v = get(cfg, key);
  if (v.is_null()) return std::nullopt;
  return v.get<V>();
}

template <typename V>
V req(const Json& cfg, const std::string& key) {
  return get(cfg, key).get<V>();
}

}  // namespace

std::string to_string(ValueType type) {
  switch (type) {
    case T::kBool: return "bool";
    case T::kInt: return "int";
    case T::kFloat: return "float";
    case T::kString: return "string";
    case T::kIntList: return "list of int";
    case T::kFloatList: return "list of float";
  }
  return "?";
}

const std::vector<SchemaEntry>& schema() {
  static const std::vector<SchemaEntry> table = build_schema();
  return table;
}

const SchemaEntry* find_entry(const std::string& key) {
  for (const auto& e : schema())
    if (e.key == key) return &e;
  return nullptr;
}

Json defaults() {
  Json out = Json::object();
  for (const auto& e : schema()) set(out, e.key, e.default_value);
  return out;
}

void validate(const Json& cfg) { validate_node(cfg, ""); }

Json merge(Json base, const Json& layer) {
  validate(layer);
  for (const auto& e : schema()) {
    const Json* node = &layer;
    bool found = true;
    for (const auto& part : split_key(e.key)) {
      if (!node->is_object() || !node->contains(part)) {
        found = false;
        break;
      }
      node = &(*node)[part];
    }
    if (found) set(base, e.key, *node);
  }
  return base;
}

void apply_override(Json& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const SchemaEntry* e = find_entry(key);
  if (!e) throw ConfigError(key + ": unknown key");
  Json value = parse_value(*e, assignment.substr(eq + 1));
  check_value(*e, value);
  set(cfg, key, std::move(value));
}

Json load(const std::string& path, const std::vector<std::string>& overrides) {
  Json cfg = defaults();
  if (!path.empty()) {
    Json file;
    try {
      file = Json::parse(data::read_text_file(path));
    } catch (const Json::exception& ex) {
      throw ConfigError(path + ": " + ex.what());
    }
    cfg = merge(std::move(cfg), file);
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

Json get(const Json& cfg, const std::string& key) {
  const Json* node = &cfg;
  for (const auto& part : split_key(key)) {
    if (!node->is_object() || !node->contains(part)) {
      const SchemaEntry* e = find_entry(key);
      if (!e) throw ConfigError(key + ": unknown key");
      return e->default_value;
    }
    node = &(*node)[part];
  }
  return *node;
}

void set(Json& cfg, const std::string& key, Json value) {
  Json* node = &cfg;
  for (const auto& part : split_key(key)) node = &(*node)[part];
  *node = std::move(value);
}

std::string help_text() {
  std::ostringstream os;
  for (const auto& e : schema()) {
    os << "  " << e.key << " (" << to_string(e.type) << ", default "
       << (e.default_value.is_null() ? std::string("derived") : e.default_value.dump()) << "): " << e.help;
    if (!e.choices.empty() && e.key != "model.preset") {
      os << " [";
      for (size_t i = 0; i < e.choices.size(); ++i) os << (i ? "|" : "") << e.choices[i];
      os << "]";
    }
    os << "\n";
  }
  return os.str();
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr0 > 0)) throw ConfigError("train.lr0 must be > 0");
  if (!(lrf > 0 && lrf <= 1)) throw ConfigError("train.lrf must lie in (0, 1]");
  if (momentum < 0 || momentum >= 1) throw ConfigError("train.momentum must lie in [0, 1)");
  if (weight_decay < 0) throw ConfigError("train.weight_decay must be >= 0");
  if (warmup_epochs < 0) throw ConfigError("train.warmup_epochs must be >= 0");
  if (image_size < 32 || image_size % 32 != 0) throw ConfigError("train.image_size must be a positive multiple of 32");
  if (max_steps < 0) throw ConfigError("train.max_steps must be >= 0");
  if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
  if (bn_recalibration_batches < 0) throw ConfigError("train.bn_recalibration_batches must be >= 0");
  if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
  if (device != "cpu") throw ConfigError("train.device: only 'cpu' is available");
}

model::ModelConfig to_model_config(const Json& cfg) {
  validate(cfg);
  model::ModelConfig m = model::preset(req<std::string>(cfg, "model.preset"));
  if (auto v = opt<std::string>(cfg, "model.fusion")) m.fusion = model::parse_fusion_kind(*v);
  if (auto v = opt<bool>(cfg, "model.cross_gate")) m.mf.cross_gate = *v;
  if (auto v = opt<int>(cfg, "model.se_reduction")) m.mf.se_reduction = *v;
  if (auto v = opt<bool>(cfg, "model.use_focus")) m.backbone.use_focus = *v;
  if (auto v = opt<double>(cfg, "model.depth_multiple")) m.backbone.depth_multiple = *v;
  if (auto v = opt<double>(cfg, "model.width_multiple")) m.backbone.width_multiple = *v;
  if (auto v = opt<std::vector<int>>(cfg, "model.spp_kernels")) m.backbone.spp_kernels = *v;
  if (auto v = opt<int>(cfg, "model.tap_low")) m.backbone.tap_low = *v;
  if (auto v = opt<int>(cfg, "model.tap_high")) m.backbone.tap_high = *v;
  if (auto v = opt<int>(cfg, "model.n_detectors")) {
    if (*v != m.head.n_detectors) m.head.anchors.clear();
    m.head.n_detectors = *v;
  }
  m.head.n_classes = req<int>(cfg, "model.n_classes");
  if (auto v = opt<std::vector<double>>(cfg, "model.anchors")) {
    if (v->size() % 2 != 0) throw ConfigError("model.anchors: expected w,h pairs");
    m.head.anchors.clear();
    for (size_t i = 0; i < v->size(); i += 2) m.head.anchors.push_back({(*v)[i], (*v)[i + 1]});
  }
  if (auto v = opt<bool>(cfg, "model.sr_enabled")) m.sr_enabled = *v;
  if (auto v = opt<std::string>(cfg, "model.sr_encoder")) m.sr.encoder_kind = model::parse_encoder_kind(*v);
  if (auto v = opt<std::string>(cfg, "model.sr_loss")) m.sr.loss_kind = model::parse_sr_loss_kind(*v);
  if (auto v = opt<std::string>(cfg, "model.sr_target")) m.sr.target = model::parse_sr_target(*v);
  if (auto v = opt<int>(cfg, "model.sr_cr_width")) m.sr.cr_width = *v;
  if (auto v = opt<int>(cfg, "model.sr_encoder_width")) m.sr.encoder_width = *v;
  if (auto v = opt<std::vector<int>>(cfg, "model.sr_decoder_widths")) m.sr.decoder_widths = *v;
  if (auto v = opt<int>(cfg, "model.edsr_resblocks")) m.sr.edsr_n_resblocks = *v;
  if (auto v = opt<int>(cfg, "model.edsr_width")) m.sr.edsr_width = *v;
  const auto seed = req<int64_t>(cfg, "model.init_seed");
  if (seed < 0) throw ConfigError("model.init_seed must be >= 0");
  m.init_seed = static_cast<uint64_t>(seed);
  m.head.conf_threshold = req<double>(cfg, "head.conf_threshold");
  m.head.nms_iou_threshold = req<double>(cfg, "head.nms_iou");
  m.head.max_detections = req<int>(cfg, "head.max_detections");
  m.head.strides.clear();
  return m.resolved();
}

RunConfig to_run_config(const Json& cfg) {
  RunConfig r;
  r.model = to_model_config(cfg);
  const int nd = r.model.head.n_detectors;

  r.loss = model::LossConfig::defaults(nd, r.model.n_classes());
  r.loss.lambda_loc = req<double>(cfg, "loss.lambda_loc");
  r.loss.lambda_obj = req<double>(cfg, "loss.lambda_obj");
  if (auto v = opt<double>(cfg, "loss.lambda_cls")) r.loss.lambda_cls = *v;
  if (auto v = opt<std::vector<double>>(cfg, "loss.layer_weights_a")) r.loss.layer_weights_a = *v;
  if (auto v = opt<std::vector<double>>(cfg, "loss.layer_weights_b")) r.loss.layer_weights_b = *v;
  if (auto v = opt<std::vector<double>>(cfg, "loss.layer_weights_c")) r.loss.layer_weights_c = *v;
  r.loss.c1 = req<double>(cfg, "loss.c1");
  r.loss.c2 = req<double>(cfg, "loss.c2");
  r.loss.anchor_t = req<double>(cfg, "loss.anchor_t");
  r.loss.iou_ratio = req<double>(cfg, "loss.iou_ratio");
  r.loss.obj_iou_grad = req<bool>(cfg, "loss.obj_iou_grad");
  r.loss.validate(nd);

  auto& t = r.train;
  t.epochs = req<int>(cfg, "train.epochs");
  t.batch_size = req<int>(cfg, "train.batch_size");
  t.lr0 = req<double>(cfg, "train.lr0");
  t.lrf = req<double>(cfg, "train.lrf");
  t.momentum = req<double>(cfg, "train.momentum");
  t.weight_decay = req<double>(cfg, "train.weight_decay");
  t.nesterov = req<bool>(cfg, "train.nesterov");
  t.warmup_epochs = req<double>(cfg, "train.warmup_epochs");
  const auto train_seed = req<int64_t>(cfg, "train.seed");
  if (train_seed < 0) throw ConfigError("train.seed must be >= 0");
  t.seed = static_cast<uint64_t>(train_seed);
  t.image_size = req<int>(cfg, "train.image_size");
  t.max_steps = req<int64_t>(cfg, "train.max_steps");
  t.checkpoint_every = req<int>(cfg, "train.checkpoint_every");
  t.bn_recalibration_batches = req<int>(cfg, "train.bn_recalibration_batches");
  t.auto_anchor = req<bool>(cfg, "train.auto_anchor");
  t.device = req<std::string>(cfg, "train.device");
  t.log_every = req<int>(cfg, "train.log_every");
  t.sr_enabled = r.model.sr_enabled;
  t.validate();

  auto& a = r.augment;
  a.enabled = req<bool>(cfg, "augment.enabled");
  const auto gains = req<std::vector<double>>(cfg, "augment.hsv_gains");
  if (gains.size() != 3) throw ConfigError("augment.hsv_gains: expected 3 values");
  std::copy(gains.begin(), gains.end(), a.hsv_gains.begin());
  a.flip_lr_prob = req<double>(cfg, "augment.flip_lr_prob");
  a.translate_frac = req<double>(cfg, "augment.translate_frac");
  const auto range = req<std::vector<double>>(cfg, "augment.scale_range");
  if (range.size() != 2) throw ConfigError("augment.scale_range: expected 2 values");
  a.scale_range = {range[0], range[1]};
  a.mosaic_prob = req<double>(cfg, "augment.mosaic_prob");
  a.validate();

  r.eval.iou_threshold = req<double>(cfg, "eval.iou_threshold");
  r.eval.batch_size = req<int>(cfg, "eval.batch_size");
  r.eval.detect_conf_threshold = req<double>(cfg, "eval.detect_conf_threshold");
  if (!(r.eval.iou_threshold > 0 && r.eval.iou_threshold <= 1)) throw ConfigError("eval.iou_threshold must lie in (0, 1]");
  if (r.eval.batch_size < 1) throw ConfigError("eval.batch_size must be >= 1");
  if (!(r.eval.detect_conf_threshold >= 0 && r.eval.detect_conf_threshold < 1))
    throw ConfigError("eval.detect_conf_threshold must lie in [0, 1)");

  r.data.manifest = req<std::string>(cfg, "data.manifest");
  r.data.train_split = req<std::string>(cfg, "data.train_split");
  r.data.val_split = req<std::string>(cfg, "data.val_split");
  r.data.synthesize_hr = req<bool>(cfg, "data.synthesize_hr");
  return r;
}

Json anchors_to_json(const std::vector<model::Anchor>& anchors) {
  Json out = Json::array();
  for (const auto& a : anchors) {
    out.push_back(a.w);
    out.push_back(a.h);
  }
  return out;
}

}  // namespace superyolo::config
