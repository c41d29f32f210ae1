/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "superyolo/anchors.hpp"
#include "superyolo/dataset.hpp"
#include "superyolo/error.hpp"
#include "superyolo/image_quality.hpp"
#include "superyolo/loss.hpp"
#include "superyolo/optim.hpp"
#include "superyolo/random.hpp"
#include "superyolo/raster.hpp"

namespace superyolo::train {

namespace {

using nn::Tensor;
using nn::Var;

void copy_into(Tensor<float>& dst, int64_t index, const data::Raster& r) {
  const int64_t plane = static_cast<int64_t>(r.channels) * r.height * r.width;
  std::memcpy(dst.data() + index * plane, r.pixels.data(), plane * sizeof(float));
}

Tensor<float> stack(const std::vector<const data::Raster*>& rasters) {
  const auto& first = *rasters.front();
  Tensor<float> t({static_cast<int64_t>(rasters.size()), first.channels, first.height, first.width});
  for (size_t i = 0; i < rasters.size(); ++i) {
    if (rasters[i]->channels != first.channels || !rasters[i]->same_extent(first))
      throw ShapeError("batch images differ in shape");
    copy_into(t, static_cast<int64_t>(i), *rasters[i]);
  }
  return t;
}

data::Raster slice(const Tensor<float>& t, int64_t index) {
  const auto& s = t.shape();
  data::Raster r(static_cast<int>(s.c), static_cast<int>(s.h), static_cast<int>(s.w));
  std::memcpy(r.pixels.data(), t.data() + index * s.c * s.h * s.w, r.pixels.size() * sizeof(float));
  return r;
}

std::vector<std::pair<int, int>> grid_sizes(const std::vector<Var<float>>& raw) {
  std::vector<std::pair<int, int>> grids;
  for (const auto& r : raw) grids.emplace_back(static_cast<int>(r.shape().h), static_cast<int>(r.shape().w));
  return grids;
}

std::vector<int> permutation(int n, uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.integer(0, i)]);
  return p;
}

std::vector<model::Anchor> fit_anchors(const std::vector<data::Sample>& dataset, int image_size, int n_detectors) {
  std::vector<model::Anchor> sizes;
  for (const auto& s : dataset)
    for (const auto& l : s.labels) sizes.push_back({l.w * image_size, l.h * image_size});
  return model::kmeans_anchors(sizes, model::kAnchorsPerDetector * n_detectors);
}

bool finite(const model::LossBreakdown& b) {
  return std::isfinite(b.l_total) && std::isfinite(b.l_o) && std::isfinite(b.l_s);
}

std::string describe(const model::LossBreakdown& b) {
  std::ostringstream os;
  os << "l_total=" << b.l_total << " l_o=" << b.l_o << " l_s=" << b.l_s << " l_loc=" << b.l_loc
     << " l_obj=" << b.l_obj << " l_cls=" << b.l_cls;
  return os.str();
}

config::Json epoch_entry(int epoch, int64_t step, double lr, const std::vector<StepRecord>& records, bool synthesized) {
  model::LossBreakdown mean;
  for (const auto& r : records) {
    mean.l_total += r.loss.l_total;
    mean.l_o += r.loss.l_o;
    mean.l_s += r.loss.l_s;
    mean.l_loc += r.loss.l_loc;
    mean.l_obj += r.loss.l_obj;
    mean.l_cls += r.loss.l_cls;
  }
  const double n = std::max<double>(1.0, static_cast<double>(records.size()));
  config::Json e = {{"epoch", epoch},          {"step", step},
                    {"lr", lr},                {"l_total", mean.l_total / n},
                    {"l_o", mean.l_o / n},     {"l_s", mean.l_s / n},
                    {"l_loc", mean.l_loc / n}, {"l_obj", mean.l_obj / n},
                    {"l_cls", mean.l_cls / n}};
  if (synthesized) e["hr_synthesized"] = true;
  return e;
}

}  // namespace

Batch make_batch(const std::vector<const data::Sample*>& samples, model::SrTarget target) {
  if (samples.empty()) throw ShapeError("empty batch");
  std::vector<data::Raster> rgb_lr, ir_lr;
  std::vector<const data::Raster*> rgb_hr, ir_hr;
  Batch b;
  for (const auto* s : samples) {
    data::validate_pair(s->pair, kLrScale);
    rgb_lr.push_back(data::bilinear_downsample(s->pair.rgb, kLrScale));
    ir_lr.push_back(data::bilinear_downsample(s->pair.ir, kLrScale));
    rgb_hr.push_back(&s->pair.rgb);
    ir_hr.push_back(&s->pair.ir);
    b.labels.push_back(s->labels);
    b.ids.push_back(s->pair.id);
  }
  auto ptrs = [](const std::vector<data::Raster>& v) {
    std::vector<const data::Raster*> out;
    for (const auto& r : v) out.push_back(&r);
    return out;
  };
  b.rgb = stack(ptrs(rgb_lr));
  b.ir = stack(ptrs(ir_lr));
  b.target = stack(target == model::SrTarget::kRgb ? rgb_hr : ir_hr);
  return b;
}

std::vector<data::Sample> load_dataset(const config::RunConfig& cfg, const std::string& split, int* n_classes,
                                       bool* hr_synthesized) {
  if (cfg.data.manifest.empty()) throw ConfigError("data.manifest: no dataset manifest given");
  const data::Manifest manifest = data::load_manifest(cfg.data.manifest);
  bool resized = false;
  auto samples = data::load_samples(manifest, split, kLrScale * cfg.train.image_size, &resized);
  if (samples.empty()) throw ConfigError("data.manifest: split '" + split + "' has no images");
  if (resized && !cfg.data.synthesize_hr)
    throw ConfigError("data.synthesize_hr: images are not " + std::to_string(kLrScale * cfg.train.image_size) +
                      " pixels and resizing is disabled");
  if (n_classes) *n_classes = manifest.n_classes();
  if (hr_synthesized) *hr_synthesized = resized;
  return samples;
}

std::unique_ptr<model::SuperYolo<float>> build_model(const Checkpoint& ckpt) {
  auto net = std::make_unique<model::SuperYolo<float>>(config::to_model_config(ckpt.config));
  net->load_state_dict(ckpt.weights, true);
  net->set_training(false);
  return net;
}

Checkpoint make_checkpoint(const model::SuperYolo<float>& net, const config::Json& cfg) {
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.weights = net.state_dict();
  return ckpt;
}

namespace {

// Replaces the running batch-norm statistics by their average over `batches`
// training batches taken in dataset order. Each pass starts from zeroed
// buffers, so after one momentum update a buffer holds momentum * batch
// statistic.
void recalibrate_batch_norm(model::SuperYolo<float>& net, const std::vector<data::Sample>& dataset, int batch_size,
                            model::SrTarget target, int batches) {
  constexpr double m = nn::BatchNorm2d<float>::kMomentum;
  std::vector<nn::NamedBuffer<float>> buffers;
  for (const auto& b : net.named_buffers())
    if (b.name.ends_with("running_mean") || b.name.ends_with("running_var")) buffers.push_back(b);
  std::vector<std::vector<double>> sums(buffers.size());
  for (size_t i = 0; i < buffers.size(); ++i) sums[i].assign(static_cast<size_t>(buffers[i].tensor->numel()), 0.0);

  net.set_training(true);
  nn::NoGradGuard no_grad;
  const int n = static_cast<int>(dataset.size());
  int first = 0;
  for (int k = 0; k < batches; ++k) {
    std::vector<const data::Sample*> ptrs;
    for (int j = first; j < std::min(n, first + batch_size); ++j) ptrs.push_back(&dataset[j]);
    first = first + batch_size >= n ? 0 : first + batch_size;
    const Batch batch = make_batch(ptrs, target);
    for (auto& b : buffers) b.tensor->fill(0.0f);
    net.forward(Var<float>(batch.rgb), Var<float>(batch.ir), net.has_sr());
    for (size_t i = 0; i < buffers.size(); ++i)
      for (size_t e = 0; e < sums[i].size(); ++e) sums[i][e] += buffers[i].tensor->data()[e] / m;
  }
  for (size_t i = 0; i < buffers.size(); ++i)
    for (size_t e = 0; e < sums[i].size(); ++e) buffers[i].tensor->data()[e] = static_cast<float>(sums[i][e] / batches);
}

}  // namespace

TrainResult train(const config::Json& cfg_in, const std::vector<data::Sample>& dataset, const TrainOptions& options) {
  config::Json cfg = options.resume ? options.resume->config : cfg_in;
  config::RunConfig run = config::to_run_config(cfg);
  const auto& tc = run.train;
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  const int hr = kLrScale * tc.image_size;
  for (const auto& s : dataset) {
    if (s.pair.height() != hr || s.pair.width() != hr)
      throw ShapeError("sample '" + s.pair.id + "' is " + std::to_string(s.pair.height()) + "x" +
                       std::to_string(s.pair.width()) + ", expected " + std::to_string(hr) + "x" + std::to_string(hr));
    for (const auto& l : s.labels)
      if (l.class_id >= run.model.n_classes())
        throw ConfigError("sample '" + s.pair.id + "' has class " + std::to_string(l.class_id) +
                          " but model.n_classes is " + std::to_string(run.model.n_classes()));
  }
  if (tc.auto_anchor && config::get(cfg, "model.anchors").is_null()) {
    config::set(cfg, "model.anchors",
                config::anchors_to_json(fit_anchors(dataset, tc.image_size, run.model.head.n_detectors)));
    run = config::to_run_config(cfg);
  }

  model::SuperYolo<float> net(run.model);
  Sgd sgd(net.named_parameters(), tc.momentum, tc.weight_decay, tc.nesterov);
  TrainResult result;
  int start_epoch = 0;
  int64_t step = 0;
  if (options.resume) {
    net.load_state_dict(options.resume->weights, true);
    sgd.load_state(options.resume->optimizer);
    start_epoch = options.resume->epoch;
    step = options.resume->step;
    result.checkpoint.metric_history = options.resume->metric_history;
  }

  const int n = static_cast<int>(dataset.size());
  const int steps_per_epoch = (n + tc.batch_size - 1) / tc.batch_size;
  int64_t total_steps = static_cast<int64_t>(tc.epochs) * steps_per_epoch;
  if (tc.max_steps > 0) total_steps = std::min(total_steps, tc.max_steps);
  const auto warmup_steps = static_cast<int64_t>(std::llround(tc.warmup_epochs * steps_per_epoch));
  const bool with_sr = net.has_sr();

  auto snapshot = [&](int epoch) {
    Checkpoint c = make_checkpoint(net, cfg);
    c.epoch = epoch;
    c.step = step;
    c.metric_history = result.checkpoint.metric_history;
    c.optimizer = sgd.state();
    return c;
  };
  auto diverged = [&](int epoch, const std::string& what) {
    std::string where;
    if (!options.checkpoint_dir.empty()) {
      where = (std::filesystem::path(options.checkpoint_dir) / "diverged.syck").string();
      save_checkpoint(where, snapshot(epoch));
    }
    throw DivergenceError("training diverged at step " + std::to_string(step) + " (epoch " + std::to_string(epoch) +
                          "): " + what + (where.empty() ? "" : "; snapshot written to " + where));
  };

  double lr = tc.lr0;
  int epoch = start_epoch;
  for (; epoch < tc.epochs && step < total_steps; ++epoch) {
    net.set_training(true);
    const auto order = permutation(n, Rng::derive(tc.seed, 2 * static_cast<uint64_t>(epoch)));
    std::vector<StepRecord> records;
    for (int first = 0; first < n && step < total_steps; first += tc.batch_size) {
      const uint64_t step_seed = Rng::derive(tc.seed, 2 * static_cast<uint64_t>(step) + 1);
      std::vector<data::Sample> owned;
      for (int j = first; j < std::min(n, first + tc.batch_size); ++j) {
        const data::Sample& base = dataset[order[j]];
        if (!run.augment.enabled) {
          owned.push_back(base);
          continue;
        }
        Rng rng(Rng::derive(step_seed, static_cast<uint64_t>(j - first)));
        data::Sample src = base;
        if (rng.bernoulli(run.augment.mosaic_prob)) {
          std::array<const data::Sample*, 4> parts{&base, nullptr, nullptr, nullptr};
          for (int k = 1; k < 4; ++k) parts[k] = &dataset[rng.integer(0, n - 1)];
          src = data::mosaic4(parts, rng.next());
          src.pair.id = base.pair.id;
        }
        owned.push_back(data::apply_augmentations(src.pair, src.labels, run.augment, rng.next()));
      }
      std::vector<const data::Sample*> ptrs;
      for (const auto& s : owned) ptrs.push_back(&s);
      const Batch batch = make_batch(ptrs, run.model.sr.target);

      lr = learning_rate(step, total_steps, warmup_steps, tc.lr0, tc.lrf);
      model::LossBreakdown bd;
      Var<float> total;
      try {
        const auto out = net.forward(Var<float>(batch.rgb), Var<float>(batch.ir), with_sr);
        const auto targets =
            model::assign_targets(batch.labels, run.model.head, grid_sizes(out.raw), run.loss.anchor_t);
        const Var<float> l_o = model::detection_loss(out.raw, targets, run.model.head, run.loss, &bd);
        Var<float> l_s;
        if (with_sr) l_s = model::sr_loss(out.sr, batch.target, run.model.sr.loss_kind);
        total = model::total_loss(l_o, l_s, run.loss, &bd);
      } catch (const DivergenceError& e) {
        std::string ids;
        for (const auto& id : batch.ids) ids += (ids.empty() ? "" : ",") + id;
        diverged(epoch, std::string(e.what()) + " [batch " + ids + "]");
      }
      ++step;
      if (!finite(bd)) diverged(epoch, "non-finite loss " + describe(bd));
      sgd.zero_grad();
      total.backward();
      sgd.step(lr);

      StepRecord rec{step, epoch, lr, bd};
      records.push_back(rec);
      result.history.push_back(rec);
      if (options.on_step) options.on_step(rec);
    }
    result.checkpoint.metric_history.push_back(epoch_entry(epoch, step, lr, records, options.hr_synthesized));
    const bool last = epoch + 1 >= tc.epochs || step >= total_steps;
    if (last && tc.bn_recalibration_batches > 0)
      recalibrate_batch_norm(net, dataset, tc.batch_size, run.model.sr.target, tc.bn_recalibration_batches);
    if (!options.checkpoint_dir.empty() && ((epoch + 1) % tc.checkpoint_every == 0 || last)) {
      std::filesystem::create_directories(options.checkpoint_dir);
      save_checkpoint((std::filesystem::path(options.checkpoint_dir) / "last.syck").string(), snapshot(epoch + 1));
    }
  }
  net.set_training(false);
  result.checkpoint = snapshot(epoch);
  return result;
}

std::vector<model::DetectionList> detect(model::SuperYolo<float>& net, const std::vector<data::ImagePair>& pairs,
                                         double conf_threshold, int batch_size) {
  net.set_training(false);
  nn::NoGradGuard no_grad;
  std::vector<model::DetectionList> out;
  const auto& head = net.config().head;
  for (size_t first = 0; first < pairs.size(); first += static_cast<size_t>(batch_size)) {
    std::vector<const data::Raster*> rgb, ir;
    for (size_t j = first; j < std::min(pairs.size(), first + batch_size); ++j) {
      data::validate_pair(pairs[j], 1);
      rgb.push_back(&pairs[j].rgb);
      ir.push_back(&pairs[j].ir);
    }
    const auto res = net.forward(Var<float>(stack(rgb)), Var<float>(stack(ir)), false);
    std::vector<Tensor<float>> raw;
    for (const auto& r : res.raw) raw.push_back(r.value());
    auto dets = model::postprocess(raw, head, rgb.front()->height, rgb.front()->width, conf_threshold);
    for (auto& d : dets) out.push_back(std::move(d));
  }
  return out;
}

EvalReport evaluate(model::SuperYolo<float>& net, const std::vector<data::Sample>& dataset,
                    const config::RunConfig& cfg) {
  net.set_training(false);
  nn::NoGradGuard no_grad;
  EvalReport rep;
  if (dataset.empty()) throw ConfigError("evaluation dataset is empty");
  const auto& head = net.config().head;
  const bool with_sr = net.has_sr();
  std::vector<std::vector<metrics::GroundTruth>> gts;
  double psnr_sum = 0, ssim_sum = 0;
  int psnr_n = 0;
  for (size_t first = 0; first < dataset.size(); first += static_cast<size_t>(cfg.eval.batch_size)) {
    std::vector<const data::Sample*> ptrs;
    for (size_t j = first; j < std::min(dataset.size(), first + cfg.eval.batch_size); ++j) ptrs.push_back(&dataset[j]);
    const Batch batch = make_batch(ptrs, net.config().sr.target);
    const int h = static_cast<int>(batch.rgb.shape().h), w = static_cast<int>(batch.rgb.shape().w);
    rep.input_h = h;
    rep.input_w = w;
    const auto res = net.forward(Var<float>(batch.rgb), Var<float>(batch.ir), with_sr);
    std::vector<Tensor<float>> raw;
    for (const auto& r : res.raw) raw.push_back(r.value());
    auto dets = model::postprocess(raw, head, h, w, head.conf_threshold);
    for (size_t j = 0; j < ptrs.size(); ++j) {
      rep.image_ids.push_back(batch.ids[j]);
      rep.detections.push_back(std::move(dets[j]));
      gts.push_back(metrics::to_ground_truth(batch.labels[j], h, w));
      if (!with_sr) continue;
      data::Raster rec = slice(res.sr.value(), static_cast<int64_t>(j));
      for (auto& v : rec.pixels) v = std::clamp(v, 0.0f, 1.0f);
      const data::Raster ref = slice(batch.target, static_cast<int64_t>(j));
      psnr_sum += metrics::psnr(rec, ref);
      ssim_sum += metrics::ssim(rec, ref);
      ++psnr_n;
    }
  }
  rep.detection = metrics::evaluate_detections(rep.detections, gts, head.n_classes, cfg.eval.iou_threshold);
  if (psnr_n > 0) {
    rep.psnr = psnr_sum / psnr_n;
    rep.ssim = ssim_sum / psnr_n;
  }
  return rep;
}

EvalReport evaluate(const Checkpoint& ckpt, const std::vector<data::Sample>& dataset, int dataset_n_classes) {
  const config::RunConfig cfg = config::to_run_config(ckpt.config);
  if (dataset_n_classes != cfg.model.n_classes())
    throw ConfigError("checkpoint has " + std::to_string(cfg.model.n_classes()) + " classes but the dataset has " +
                      std::to_string(dataset_n_classes));
  auto net = build_model(ckpt);
  return evaluate(*net, dataset, cfg);
}

}  // namespace superyolo::train
