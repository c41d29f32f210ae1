/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

#include "plot.hpp"
#include "superyolo/complexity.hpp"
#include "superyolo/config.hpp"
#include "superyolo/dataset.hpp"
#include "superyolo/error.hpp"
#include "superyolo/image_io.hpp"
#include "superyolo/labels.hpp"
#include "superyolo/synthetic.hpp"
#include "superyolo/trainer.hpp"

namespace superyolo::cli {

namespace fs = std::filesystem;
using config::Json;

namespace {

struct Common {
  std::string output_dir;
  int verbosity = 1;
};

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", overrides, "override one configuration key (dotted.key=value); repeatable");
    cmd->footer("Configuration keys:\n" + config::help_text());
  }
  Json load() const { return config::load(path, overrides); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const Json& j) { data::write_text_file(path.string(), j.dump(2) + "\n"); }

// Dataset class names for the report, "classK" when unavailable.
std::vector<std::string> class_names(const std::string& manifest, int n) {
  std::vector<std::string> names;
  if (!manifest.empty()) names = data::load_manifest(manifest).class_names;
  for (int i = static_cast<int>(names.size()); i < n; ++i) names.push_back("class" + std::to_string(i));
  return names;
}

// ---------------------------------------------------------------- prepare-data

struct PrepareArgs {
  std::string mode = "synthetic";
  std::string annotations;
  std::string images;
  std::string out;
  int fallback_size = 1024;
  double val_fraction = 0.1;
  data::SyntheticConfig synthetic;
};

int cmd_prepare(const PrepareArgs& a, const Common& c, std::ostream& out) {
  const std::string dir = a.out.empty() ? (fs::path(c.output_dir) / "data").string() : a.out;
  if (a.mode == "vedai") {
    if (a.annotations.empty()) throw ConfigError("--annotations is required in vedai mode");
    const auto rep = data::prepare_vedai(a.annotations, a.images, dir, a.fallback_size, a.val_fraction);
    out << "images " << rep.images << " converted " << rep.stats.converted << " degenerate " << rep.stats.degenerate
        << " skipped " << rep.stats.skipped_unmapped() << " missing_images " << rep.missing_images << "\n";
    for (const auto& [cls, n] : rep.stats.skipped_by_class) out << "  skipped class " << cls << ": " << n << "\n";
  } else {
    a.synthetic.validate();
    const auto m = data::generate_synthetic_dataset(a.synthetic, dir);
    out << "images " << m.entries.size() << " classes " << m.n_classes() << "\n";
  }
  out << "manifest " << (fs::path(dir) / "manifest.json").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const ConfigArgs& ca, const std::string& resume, const Common& c, std::ostream& out) {
  std::unique_ptr<train::Checkpoint> resumed;
  Json cfg = ca.load();
  if (!resume.empty()) {
    resumed = std::make_unique<train::Checkpoint>(train::load_checkpoint(resume));
    for (const auto& o : ca.overrides)
      if (o.rfind("data.", 0) == 0) config::apply_override(resumed->config, o);
    cfg = resumed->config;
  }
  const auto run = config::to_run_config(cfg);
  int n_classes = 0;
  bool synthesized = false;
  const auto samples = train::load_dataset(run, run.data.train_split, &n_classes, &synthesized);
  if (n_classes != run.model.n_classes())
    throw ConfigError("model.n_classes: config has " + std::to_string(run.model.n_classes()) +
                      " classes but the dataset has " + std::to_string(n_classes));
  const fs::path dir(c.output_dir);
  ensure_dir(dir);
  if (synthesized && c.verbosity > 0)
    out << "note: sources resized to " << 2 * run.train.image_size << " px; SR targets carry no extra detail\n";

  train::TrainOptions opts;
  opts.checkpoint_dir = (dir / "checkpoints").string();
  opts.resume = resumed.get();
  opts.hr_synthesized = synthesized;
  std::ofstream csv(dir / "loss_history.csv", resumed ? std::ios::app : std::ios::trunc);
  if (!resumed) csv << "step,epoch,lr,l_total,l_o,l_s,l_loc,l_obj,l_cls,positives\n";
  opts.on_step = [&](const train::StepRecord& r) {
    const auto& l = r.loss;
    csv << r.step << ',' << r.epoch << ',' << data::format_double(r.lr) << ',' << data::format_double(l.l_total) << ','
        << data::format_double(l.l_o) << ',' << data::format_double(l.l_s) << ',' << data::format_double(l.l_loc)
        << ',' << data::format_double(l.l_obj) << ',' << data::format_double(l.l_cls) << ',' << l.positives << '\n';
    if (c.verbosity > 0 && (r.step % run.train.log_every == 0 || r.step == 1))
      out << "epoch " << r.epoch << " step " << r.step << " lr " << fmt("%.5f", r.lr) << " l_total "
          << fmt("%.5f", l.l_total) << " l_o " << fmt("%.5f", l.l_o) << " l_s " << fmt("%.5f", l.l_s) << "\n"
          << std::flush;
  };
  const auto result = train::train(cfg, samples, opts);
  train::save_checkpoint((dir / "final.syck").string(), result.checkpoint);
  write_json(dir / "config.json", result.checkpoint.config);
  out << "trained " << result.history.size() << " steps; checkpoint " << (dir / "final.syck").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

Json curve_json(const metrics::PrCurve& pr, const std::string& name, bool included) {
  return {{"class_id", pr.class_id}, {"name", name},       {"ap50", pr.ap},       {"n_gt", pr.n_gt},
          {"n_det", pr.n_det},       {"included", included}, {"recall", pr.recall}, {"precision", pr.precision}};
}

int cmd_eval(const ConfigArgs& ca, const std::string& ckpt_path, const std::string& split_arg, const Common& c,
             std::ostream& out) {
  const auto ckpt = train::load_checkpoint(ckpt_path);
  Json cfg = ckpt.config;
  if (!ca.path.empty()) cfg = config::merge(cfg, Json::parse(data::read_text_file(ca.path)));
  for (const auto& o : ca.overrides) config::apply_override(cfg, o);
  const auto run = config::to_run_config(cfg);
  const std::string split = split_arg.empty() ? run.data.val_split : split_arg;
  int n_classes = 0;
  const auto samples = train::load_dataset(run, split, &n_classes);
  if (n_classes != run.model.n_classes())
    throw ConfigError("checkpoint has " + std::to_string(run.model.n_classes()) + " classes but the dataset has " +
                      std::to_string(n_classes));
  train::Checkpoint eval_ckpt = ckpt;
  eval_ckpt.config = cfg;
  auto net = train::build_model(eval_ckpt);
  const auto rep = train::evaluate(*net, samples, run);
  const auto names = class_names(run.data.manifest, n_classes);

  Json classes = Json::array();
  out << "class                 n_gt   n_det    AP50\n";
  for (size_t k = 0; k < rep.detection.per_class.size(); ++k) {
    const auto& pr = rep.detection.per_class[k];
    classes.push_back(curve_json(pr, names[k], rep.detection.included[k] != 0));
    char line[128];
    std::snprintf(line, sizeof line, "%-20s %6lld %7lld %7.4f%s\n", names[k].c_str(), static_cast<long long>(pr.n_gt),
                  static_cast<long long>(pr.n_det), pr.ap, rep.detection.included[k] ? "" : "  (excluded)");
    out << line;
  }
  out << "mAP50 " << fmt("%.4f", rep.detection.map) << "\n";
  Json report = {{"checkpoint", ckpt_path},
                 {"split", split},
                 {"images", samples.size()},
                 {"iou_threshold", run.eval.iou_threshold},
                 {"map50", rep.detection.map},
                 {"tp", rep.detection.counts.tp},
                 {"fp", rep.detection.counts.fp},
                 {"fn", rep.detection.counts.fn},
                 {"classes", classes}};
  if (rep.psnr) {
    out << "PSNR " << fmt("%.3f", *rep.psnr) << " dB  SSIM " << fmt("%.4f", *rep.ssim) << "\n";
    report["psnr"] = *rep.psnr;
    report["ssim"] = *rep.ssim;
  }
  const fs::path dir(c.output_dir);
  ensure_dir(dir);
  write_json(dir / "eval.json", report);
  std::string dets;
  for (size_t i = 0; i < rep.detections.size(); ++i) dets += model::serialize_detections(rep.image_ids[i], rep.detections[i]);
  data::write_text_file((dir / "detections.txt").string(), dets);
  out << "report " << (dir / "eval.json").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- detect

int cmd_detect(const std::string& ckpt_path, const std::string& rgb, const std::string& ir, double conf,
               const Common& c, std::ostream& out) {
  const auto ckpt = train::load_checkpoint(ckpt_path);
  const auto run = config::to_run_config(ckpt.config);
  auto net = train::build_model(ckpt);
  data::ImagePair pair = data::read_pair(rgb, ir, fs::path(rgb).stem().string());
  const int h = pair.height(), w = pair.width();
  const int s = run.train.image_size;
  if (h != s || w != s) {
    pair.rgb = data::bilinear_resize(pair.rgb, s, s);
    pair.ir = data::bilinear_resize(pair.ir, s, s);
  }
  const double threshold = conf >= 0 ? conf : run.eval.detect_conf_threshold;
  auto dets = train::detect(*net, {pair}, threshold, 1).front();
  const double sx = static_cast<double>(w) / s, sy = static_cast<double>(h) / s;
  for (auto& d : dets) {
    d.x1 *= sx, d.x2 *= sx;
    d.y1 *= sy, d.y2 *= sy;
  }
  const std::string text = model::serialize_detections(pair.id, dets);
  out << text;
  const fs::path dir(c.output_dir);
  ensure_dir(dir);
  data::write_text_file((dir / "detections.txt").string(), text);
  return kOk;
}

// ---------------------------------------------------------------- export

int cmd_export(const std::string& ckpt_path, const std::string& out_path, const Common& c, std::ostream& out) {
  const auto ckpt = train::load_checkpoint(ckpt_path);
  const auto exported = train::export_inference(ckpt);
  const std::string path = out_path.empty() ? (fs::path(c.output_dir) / "inference.syck").string() : out_path;
  if (fs::path(path).has_parent_path()) ensure_dir(fs::path(path).parent_path());
  train::save_checkpoint(path, exported);
  auto net = train::build_model(exported);
  const int s = config::to_run_config(exported.config).train.image_size;
  out << "params " << fmt("%.4f", metrics::count_params(*net) / 1e6) << "M  GFLOPs@" << s << " "
      << fmt("%.3f", metrics::count_gflops(*net, s, s)) << "\n";
  out << "dropped " << ckpt.weights.size() - exported.weights.size() << " SR tensors; wrote " << path << "\n";
  return kOk;
}

// ---------------------------------------------------------------- summarize

int cmd_summarize(const ConfigArgs& ca, std::vector<std::string> presets, bool all, int size, const std::string& csv,
                  std::ostream& out) {
  std::vector<metrics::ComplexityReport> reports;
  if (all) presets = model::preset_names();
  if (!ca.path.empty() || !ca.overrides.empty() || presets.empty()) {
    const Json cfg = ca.load();
    model::SuperYolo<float> net(config::to_model_config(cfg));
    reports.push_back(metrics::complexity_report(net, size, size, config::get(cfg, "model.preset").get<std::string>()));
  }
  for (const auto& name : presets) {
    model::SuperYolo<float> net(model::preset(name));
    reports.push_back(metrics::complexity_report(net, size, size, name));
  }
  out << metrics::format_report(reports);
  if (!csv.empty()) data::write_text_file(csv, metrics::report_csv(reports));
  return kOk;
}

// ---------------------------------------------------------------- plot-pr

int cmd_plot(const std::string& eval_path, const std::string& out_dir, const Common& c, std::ostream& out) {
  Json report;
  try {
    report = Json::parse(data::read_text_file(eval_path));
  } catch (const Json::exception& e) {
    throw ParseError(e.what(), 0, eval_path);
  }
  const fs::path dir = out_dir.empty() ? fs::path(c.output_dir) / "pr" : fs::path(out_dir);
  ensure_dir(dir);
  std::vector<PlotSeries> all;
  int written = 0;
  try {
    for (const auto& cls : report.at("classes")) {
      PlotSeries s{cls.at("name").get<std::string>() + " AP50 " + fmt("%.3f", cls.at("ap50").get<double>()),
                   cls.at("recall").get<std::vector<double>>(), cls.at("precision").get<std::vector<double>>()};
      const std::string file = "pr_class" + std::to_string(cls.at("class_id").get<int>()) + ".png";
      plot_pr((dir / file).string(), "PR curve: " + cls.at("name").get<std::string>(), {s});
      all.push_back(std::move(s));
      ++written;
    }
    plot_pr((dir / "pr_all.png").string(), "PR curves, mAP50 " + fmt("%.3f", report.at("map50").get<double>()), all);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("not an evaluation report: ") + e.what(), 0, eval_path);
  }
  out << "wrote " << written << " class plots and pr_all.png to " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal RGB-IR object detection with an auxiliary super-resolution branch", "superyolo"};
  app.require_subcommand(1);
  Common common;
  common.output_dir = kDefaultOutputDir;
  app.add_option("-o,--output-dir", common.output_dir, "artifact directory")
      ->envname(kOutputDirVariable)
      ->capture_default_str();
  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "more output");
  app.add_flag("-q,--quiet", quiet, "only results and errors");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare-data", "convert VEDAI annotations or generate a synthetic dataset");
  prepare->add_option("--mode", prep.mode, "source kind")->check(CLI::IsMember({"vedai", "synthetic"}))->capture_default_str();
  prepare->add_option("--annotations", prep.annotations, "VEDAI annotation file or directory");
  prepare->add_option("--images", prep.images, "directory with <id>_co.png / <id>_ir.png pairs");
  prepare->add_option("--out", prep.out, "dataset directory (default <output-dir>/data)");
  prepare->add_option("--fallback-size", prep.fallback_size, "image extent when a pair is missing")->capture_default_str();
  prepare->add_option("--val-fraction", prep.val_fraction, "share of images in the val split")->capture_default_str();
  prepare->add_option("--n-images", prep.synthetic.n_images, "synthetic images")->capture_default_str();
  prepare->add_option("--size", prep.synthetic.image_size, "synthetic image extent")->capture_default_str();
  prepare->add_option("--classes", prep.synthetic.n_classes, "synthetic classes")->capture_default_str();
  prepare->add_option("--max-objects", prep.synthetic.max_objects, "objects per synthetic image")->capture_default_str();
  prepare->add_option("--seed", prep.synthetic.seed, "synthetic seed")->capture_default_str();

  ConfigArgs train_cfg;
  std::string resume;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cfg.attach(train_cmd);
  train_cmd->add_option("--resume", resume, "continue from a checkpoint")->check(CLI::ExistingFile);

  ConfigArgs eval_cfg;
  std::string eval_ckpt, eval_split;
  auto* eval_cmd = app.add_subcommand("eval", "per-class AP, mAP50 and reconstruction quality");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint to evaluate")->required();
  eval_cmd->add_option("--split", eval_split, "manifest split (default data.val_split)");
  eval_cfg.attach(eval_cmd);

  std::string det_ckpt, det_rgb, det_ir;
  double det_conf = -1;
  auto* detect_cmd = app.add_subcommand("detect", "detect objects in one RGB/IR pair");
  detect_cmd->add_option("--checkpoint", det_ckpt, "checkpoint")->required();
  detect_cmd->add_option("--rgb", det_rgb, "RGB image")->required();
  detect_cmd->add_option("--ir", det_ir, "IR image")->required();
  detect_cmd->add_option("--conf", det_conf, "score threshold (default eval.detect_conf_threshold)");

  std::string exp_ckpt, exp_out;
  auto* export_cmd = app.add_subcommand("export", "strip the SR branch and optimizer state for inference");
  export_cmd->add_option("--checkpoint", exp_ckpt, "training checkpoint")->required();
  export_cmd->add_option("--out", exp_out, "output path (default <output-dir>/inference.syck)");

  ConfigArgs sum_cfg;
  std::vector<std::string> sum_presets;
  bool sum_all = false;
  int sum_size = 512;
  std::string sum_csv;
  auto* summarize = app.add_subcommand("summarize", "parameter and GFLOPs table");
  summarize->add_option("--preset", sum_presets, "named model; repeatable")->check(CLI::IsMember(model::preset_names()));
  summarize->add_flag("--all", sum_all, "every named model");
  summarize->add_option("--size", sum_size, "square input extent")->capture_default_str();
  summarize->add_option("--csv", sum_csv, "also write the table as CSV");
  sum_cfg.attach(summarize);

  std::string plot_eval, plot_out;
  auto* plot = app.add_subcommand("plot-pr", "PR-curve images from an evaluation report");
  plot->add_option("--eval", plot_eval, "eval.json written by the eval command")->required();
  plot->add_option("--out", plot_out, "image directory (default <output-dir>/pr)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  common.verbosity = quiet ? 0 : 1 + verbose;

  try {
    if (prepare->parsed()) return cmd_prepare(prep, common, out);
    if (train_cmd->parsed()) return cmd_train(train_cfg, resume, common, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_cfg, eval_ckpt, eval_split, common, out);
    if (detect_cmd->parsed()) return cmd_detect(det_ckpt, det_rgb, det_ir, det_conf, common, out);
    if (export_cmd->parsed()) return cmd_export(exp_ckpt, exp_out, common, out);
    if (summarize->parsed()) return cmd_summarize(sum_cfg, sum_presets, sum_all, sum_size, sum_csv, out);
    if (plot->parsed()) return cmd_plot(plot_eval, plot_out, common, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace superyolo::cli
