#pragma once

// Batch command-line front end. `run` never exits the process; it returns
//   0 on success, 1 on a data error, 2 on a usage error.
// Failures print exactly one line to `err`: "error: <kind>: <message>".

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avexpr/alignment.hpp"
#include "avexpr/feature_file.hpp"
#include "avexpr/folds.hpp"
#include "avexpr/frame_set.hpp"
#include "avexpr/imageops.hpp"
#include "avexpr/manifest.hpp"
#include "avexpr/metrics.hpp"
#include "avexpr/smoothing.hpp"
#include "avexpr/synthetic.hpp"
#include "avexpr/trainer.hpp"

namespace avexpr::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

// Runs task(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to per-index slots so the output order never depends on jobs.
// The exception of the lowest failing index is rethrown.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text(path, text);
  }
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Frames of every video in a manifest of AFF1 files, in manifest order.
inline FrameSet load_frames(const fs::path& manifest) {
  FrameSet out;
  for (const auto& e : read_manifest(manifest)) {
    const auto seq = read_feature_file(e.path);
    if (seq.video_id != e.id) {
      throw ValidationError("manifest id '" + e.id + "' does not match file video_id '" + seq.video_id + "'");
    }
    out.append(FrameSet::from_sequence(seq));
  }
  if (out.empty()) throw ValidationError("manifest " + manifest.string() + " holds no frames");
  return out;
}

// Labels from either an AFF1 file or the argmax of an LGT1 file.
inline std::vector<ExpressionLabel> load_labels(const fs::path& path) {
  const auto data = io::read_file(path);
  const auto magic = io::read_magic(data);
  if (magic == aff1::kMagic) {
    std::vector<ExpressionLabel> out;
    for (const auto& r : decode_feature_file(data).records) out.push_back(r.label);
    return out;
  }
  if (magic == lgt1::kMagic) return decide(decode_logits(data));
  throw FormatError(path.string() + ": expected an AFF1 or LGT1 file");
}

inline std::vector<PadSide> parse_sides(const std::vector<std::string>& names) {
  std::vector<PadSide> out;
  for (const auto& n : names) {
    if (n == "left") out.push_back(PadSide::Left);
    else if (n == "right") out.push_back(PadSide::Right);
    else if (n == "top") out.push_back(PadSide::Top);
    else if (n == "bottom") out.push_back(PadSide::Bottom);
    else throw ValidationError("unknown pad side '" + n + "'");
  }
  return out;
}

inline FaceBox box_of(const ManifestEntry& e) {
  const auto& j = e.fields;
  if (!j.contains("box") || !j["box"].is_array() || j["box"].size() != 3) {
    throw FormatError("manifest entry '" + e.id + "' needs \"box\": [cx, cy, side]");
  }
  return {j["box"][0].get<double>(), j["box"][1].get<double>(), j["box"][2].get<double>()};
}

inline std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Option bundles
// ---------------------------------------------------------------------------

struct AlignArgs {
  std::string manifest;
  std::string out_dir;
  std::string mode = "window";
  double window_s = 0.5;
  int jobs = 1;
};

struct TrainArgs {
  std::string manifest;
  std::string val_manifest;
  std::string out_dir;
  std::string head = "gated";
  int k = 5;
  int fold = -1;
  bool cv = false;
  bool no_class_weights = false;
  TrainConfig cfg;
};

struct PredictArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir;
  int jobs = 1;
};

struct SmoothArgs {
  std::string in;
  std::string out;
  std::string manifest;
  std::string out_dir;
  std::string strategy = "median";
  int window = 101;
  double sigma = 0.0;
};

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string logits_manifest;
  std::string manifest;
  std::string out;
  int num_classes = kNumClasses;
};

struct SweepArgs {
  std::string logits_manifest;
  std::string manifest;
  std::string windows = "3:205:2";
  std::string strategy = "median";
  std::string out;
  int num_classes = kNumClasses;
};

struct AugmentArgs {
  std::string manifest;
  std::string out_dir;
  std::uint64_t seed = 0;
  PadAugConfig cfg;
  std::vector<std::string> sides = {"left", "right", "top", "bottom"};
  int jobs = 1;
};

struct CropArgs {
  std::string manifest;
  std::string out_dir;
  int out_side = 224;
  std::vector<double> scales = {0.9, 1.2, 1.5};
  int jobs = 1;
};

struct FoldsArgs {
  std::string manifest;
  int k = 5;
  std::uint64_t seed = 0;
  std::string out;
};

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  SyntheticConfig cfg;
};

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline void cmd_align(const AlignArgs& a) {
  AlignmentConfig cfg;
  cfg.mode = a.mode == "nearest" ? AlignMode::Nearest : AlignMode::WindowMean;
  cfg.window = a.window_s;
  if (!(cfg.window > 0.0)) throw ValidationError("--window-s must be positive");
  const auto entries = read_manifest(a.manifest);
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  std::vector<ManifestEntry> written(entries.size());
  detail::parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    auto seq = read_feature_file(e.path);
    fs::path audio_path;
    if (e.fields.contains("audio")) {
      audio_path = fs::path(e.fields["audio"].get<std::string>());
      if (audio_path.is_relative()) audio_path = fs::path(a.manifest).parent_path() / audio_path;
    } else {
      audio_path = fs::path(e.path).replace_extension(".afa1");
    }
    if (fs::exists(audio_path)) seq = attach_audio(seq, read_audio_file(audio_path), cfg);
    ManifestEntry out;
    out.id = e.id;
    out.path = out_dir / (e.id + ".aff1");
    out.fps = seq.fps;
    out.n_frames = seq.records.size();
    write_feature_file(seq, out.path);
    written[i] = std::move(out);
  });
  write_manifest(written, out_dir / "manifest.jsonl");
}

inline void cmd_train(TrainArgs a, std::ostream& out) {
  a.cfg.class_weighted = !a.no_class_weights;
  const HeadKind kind = parse_head_kind(a.head);
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  const FrameSet data = detail::load_frames(a.manifest);

  if (a.cv) {
    const auto r = cross_validate(data, a.k, kind, a.cfg);
    const auto text = r.to_json().dump(2) + "\n";
    detail::write_text(out_dir / "cv.json", text);
    out << text;
    return;
  }

  FrameSet train;
  FrameSet val;
  if (!a.val_manifest.empty()) {
    if (a.fold >= 0) throw ValidationError("--val-manifest and --fold are mutually exclusive");
    train = data.labeled();
    val = detail::load_frames(a.val_manifest);
  } else {
    if (a.fold < 0) throw ValidationError("train needs --val-manifest, --fold or --cv");
    if (a.fold >= a.k) throw ValidationError("--fold must be < --k");
    const auto split = make_folds(data.videos(), a.k, a.cfg.seed);
    const auto held = split.videos_in(a.fold);
    const std::set<std::string> held_set(held.begin(), held.end());
    std::set<std::string> rest;
    for (const auto& v : data.videos()) {
      if (!held_set.contains(v)) rest.insert(v);
    }
    val = data.subset(data.frames_of(held_set));
    train = data.subset(data.frames_of(rest)).labeled();
  }
  const auto result = train_head(train, kind, a.cfg, val);
  save_checkpoint(result.best, out_dir / "checkpoint.ntc1");
  detail::write_text(out_dir / "history.json", result.history.to_json().dump(2) + "\n");
  const auto pred = decide(predict_logits(result.best, val.all()));
  auto report = eval_report(confusion(pred, val.labels, a.cfg.num_classes));
  report["head"] = std::string(to_string(kind));
  report["parameters"] = param_count(result.best);
  report["best_epoch"] = result.history.best_epoch;
  const auto text = report.dump(2) + "\n";
  detail::write_text(out_dir / "eval.json", text);
  out << text;
}

inline void cmd_predict(const PredictArgs& a) {
  const HeadParams head = load_checkpoint(a.checkpoint);
  const auto entries = read_manifest(a.manifest);
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  std::vector<ManifestEntry> written(entries.size());
  detail::parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    const auto frames = FrameSet::from_sequence(read_feature_file(e.path));
    const Matrix logits = predict_logits(head, frames.all());
    ManifestEntry w;
    w.id = e.id;
    w.path = out_dir / (e.id + ".lgt1");
    w.fps = e.fps;
    w.n_frames = static_cast<std::uint64_t>(logits.rows());
    write_logits(logits, w.path);
    written[i] = std::move(w);
  });
  write_manifest(written, out_dir / "manifest.jsonl");
}

inline void cmd_smooth(const SmoothArgs& a) {
  SmoothingConfig cfg{parse_strategy(a.strategy), a.window, std::nullopt};
  if (a.sigma > 0.0) cfg.gaussian_sigma = a.sigma;
  cfg.validate();
  if (!a.in.empty()) {
    if (a.out.empty()) throw ValidationError("smooth --in needs --out");
    write_logits(smooth_logits(read_logits(a.in), cfg), a.out);
    return;
  }
  if (a.manifest.empty() || a.out_dir.empty()) throw ValidationError("smooth needs --in/--out or --manifest/--out-dir");
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  auto entries = read_manifest(a.manifest);
  for (auto& e : entries) {
    const auto dst = out_dir / (e.id + ".lgt1");
    write_logits(smooth_logits(read_logits(e.path), cfg), dst);
    e.path = dst;
  }
  write_manifest(entries, out_dir / "manifest.jsonl");
}

// Pairs each logits-manifest entry with the labeled AFF1 entry of the same id.
inline std::vector<LabeledLogits> load_labeled_logits(const std::string& logits_manifest, const std::string& manifest) {
  std::map<std::string, fs::path> truth;
  for (const auto& e : read_manifest(manifest)) truth[e.id] = e.path;
  std::vector<LabeledLogits> out;
  for (const auto& e : read_manifest(logits_manifest)) {
    const auto it = truth.find(e.id);
    if (it == truth.end()) throw ValidationError("no labels for video '" + e.id + "'");
    LabeledLogits v;
    v.logits = read_logits(e.path);
    v.labels = detail::load_labels(it->second);
    if (static_cast<std::size_t>(v.logits.rows()) != v.labels.size()) {
      throw ValidationError("video '" + e.id + "': " + std::to_string(v.logits.rows()) + " logit rows for " +
                            std::to_string(v.labels.size()) + " labels");
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline void cmd_eval(const EvalArgs& a, std::ostream& out) {
  ConfusionMatrix cm(a.num_classes);
  if (!a.pred.empty() || !a.truth.empty()) {
    if (a.pred.empty() || a.truth.empty()) throw ValidationError("eval needs both --pred and --truth");
    cm = confusion(detail::load_labels(a.pred), detail::load_labels(a.truth), a.num_classes);
  } else {
    if (a.logits_manifest.empty() || a.manifest.empty()) {
      throw ValidationError("eval needs --pred/--truth or --logits-manifest/--manifest");
    }
    for (const auto& v : load_labeled_logits(a.logits_manifest, a.manifest)) {
      cm.merge(confusion(decide(v.logits), v.labels, a.num_classes));
    }
  }
  detail::emit(eval_report(cm).dump(2) + "\n", a.out, out);
}

inline void cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const auto windows = parse_window_range(a.windows);
  const auto videos = load_labeled_logits(a.logits_manifest, a.manifest);
  const auto rows = sweep_windows(videos, parse_strategy(a.strategy), windows, a.num_classes);
  detail::emit(sweep_csv(rows), a.out, out);
}

inline void cmd_augment(AugmentArgs a) {
  a.cfg.sides = detail::parse_sides(a.sides);
  a.cfg.validate();
  const auto entries = read_manifest(a.manifest);
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  std::vector<ManifestEntry> written(entries.size());
  detail::parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    Rng rng = Rng(a.seed).fork(i);
    ManifestEntry w = e;
    w.path = out_dir / (e.id + ".ppm");
    write_ppm(padaug(read_ppm(e.path), a.cfg, rng), w.path);
    written[i] = std::move(w);
  });
  write_manifest(written, out_dir / "manifest.jsonl");
}

inline void cmd_crop(const CropArgs& a) {
  if (a.scales.empty()) throw ValidationError("--scales must not be empty");
  const auto entries = read_manifest(a.manifest);
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  std::vector<std::vector<ManifestEntry>> written(entries.size());
  detail::parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    const auto img = read_ppm(e.path);
    const auto box = detail::box_of(e);
    for (std::size_t s = 0; s < a.scales.size(); ++s) {
      ManifestEntry w = e;
      w.path = out_dir / (e.id + "_s" + std::to_string(s) + ".ppm");
      w.fields["source_id"] = e.id;
      w.fields["scale"] = a.scales[s];
      w.id = e.id + "_s" + std::to_string(s);
      write_ppm(crop_scaled(img, box, a.scales[s], a.out_side), w.path);
      written[i].push_back(std::move(w));
    }
  });
  std::vector<ManifestEntry> flat;
  for (auto& v : written) flat.insert(flat.end(), v.begin(), v.end());
  write_manifest(flat, out_dir / "manifest.jsonl");
}

inline void cmd_folds(const FoldsArgs& a, std::ostream& out) {
  std::vector<std::string> ids;
  for (const auto& e : read_manifest(a.manifest)) ids.push_back(e.id);
  const auto split = make_folds(ids, a.k, a.seed);
  nlohmann::json j;
  j["k"] = split.k;
  j["seed"] = a.seed;
  j["folds"] = nlohmann::json::array();
  for (int f = 0; f < split.k; ++f) j["folds"].push_back(split.videos_in(f));
  detail::emit(j.dump(2) + "\n", a.out, out);
}

inline void cmd_synth(const SynthArgs& a) {
  const fs::path out_dir = a.out_dir;
  detail::ensure_dir(out_dir);
  std::vector<ManifestEntry> entries;
  for (const auto& v : generate_synthetic(a.cfg, a.seed)) {
    ManifestEntry e;
    e.id = v.sequence.video_id;
    e.path = out_dir / (e.id + ".aff1");
    e.fps = v.sequence.fps;
    e.n_frames = v.sequence.records.size();
    write_feature_file(v.sequence, e.path);
    write_audio_file(v.audio, out_dir / (e.id + ".afa1"));
    entries.push_back(std::move(e));
  }
  write_manifest(entries, out_dir / "manifest.jsonl");
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Audio-visual expression recognition toolkit", "avexpr"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Attach window-aligned audio features to AFF1 visual files");
  c_align->add_option("--manifest", align.manifest, "Manifest of AFF1 files; audio is read from the entry's \"audio\" key or the sibling .afa1 file")->required();
  c_align->add_option("--out-dir", align.out_dir, "Output directory for aligned AFF1 files and manifest.jsonl")->required();
  c_align->add_option("--mode", align.mode, "Alignment mode")->check(CLI::IsMember({"nearest", "window"}))->capture_default_str();
  c_align->add_option("--window-s", align.window_s, "Window width in seconds for window mode")->capture_default_str();
  c_align->add_option("--jobs", align.jobs, "Parallel videos")->check(CLI::PositiveNumber)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a classification head on aligned features");
  c_train->add_option("--manifest", train.manifest, "Manifest of aligned AFF1 training files")->required();
  c_train->add_option("--val-manifest", train.val_manifest, "Manifest of validation files");
  c_train->add_option("--out-dir", train.out_dir, "Directory for checkpoint.ntc1, history.json and eval.json (cv.json with --cv)")->required();
  c_train->add_option("--head", train.head, "Head kind")->check(CLI::IsMember({"moe", "gated", "concat-linear", "concat-mlp"}))->capture_default_str();
  c_train->add_option("--k", train.k, "Number of video-level folds")->capture_default_str();
  c_train->add_option("--fold", train.fold, "Hold out this fold of --manifest for validation");
  c_train->add_flag("--cv", train.cv, "Run k-fold cross-validation and report mean/std macro-F1");
  c_train->add_option("--epochs", train.cfg.epochs, "Training epochs")->capture_default_str();
  c_train->add_option("--lr", train.cfg.lr_head, "AdamW learning rate")->capture_default_str();
  c_train->add_option("--weight-decay", train.cfg.weight_decay, "Decoupled weight decay")->capture_default_str();
  c_train->add_option("--batch-size", train.cfg.batch_size, "Mini-batch size")->capture_default_str();
  c_train->add_option("--label-smoothing", train.cfg.label_smoothing, "Label smoothing epsilon")->capture_default_str();
  c_train->add_option("--mixup-alpha", train.cfg.mixup_alpha, "Mixup Beta(alpha, alpha); 0 disables")->capture_default_str();
  c_train->add_option("--dropout", train.cfg.dropout, "Dropout probability")->capture_default_str();
  c_train->add_option("--fusion-hidden", train.cfg.fusion_hidden, "Fusion hidden width d")->capture_default_str();
  c_train->add_option("--moe-hidden", train.cfg.moe_hidden, "Expert hidden width H (0: input width)")->capture_default_str();
  c_train->add_option("--experts", train.cfg.num_experts, "Number of experts M")->capture_default_str();
  c_train->add_option("--num-classes", train.cfg.num_classes, "Number of classes")->capture_default_str();
  c_train->add_flag("--no-class-weights", train.no_class_weights, "Disable class-balanced loss weights");
  c_train->add_option("--seed", train.cfg.seed, "Random seed")->capture_default_str();

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Write LGT1 logits for every video in a manifest");
  c_predict->add_option("--checkpoint", predict.checkpoint, "NTC1 checkpoint from train")->required();
  c_predict->add_option("--manifest", predict.manifest, "Manifest of aligned AFF1 files")->required();
  c_predict->add_option("--out-dir", predict.out_dir, "Output directory for .lgt1 files and manifest.jsonl")->required();
  c_predict->add_option("--jobs", predict.jobs, "Parallel videos")->check(CLI::PositiveNumber)->capture_default_str();

  SmoothArgs smooth;
  auto* c_smooth = app.add_subcommand("smooth", "Temporally smooth LGT1 logits");
  c_smooth->add_option("--in", smooth.in, "Input LGT1 file");
  c_smooth->add_option("--out", smooth.out, "Output LGT1 file");
  c_smooth->add_option("--manifest", smooth.manifest, "Manifest of LGT1 files (alternative to --in)");
  c_smooth->add_option("--out-dir", smooth.out_dir, "Output directory for manifest mode");
  c_smooth->add_option("--strategy", smooth.strategy, "Smoothing strategy")->check(CLI::IsMember({"mean", "median", "gaussian", "vote"}))->capture_default_str();
  c_smooth->add_option("--window", smooth.window, "Odd window length")->capture_default_str();
  c_smooth->add_option("--sigma", smooth.sigma, "Gaussian sigma in frames (default window/6)");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Macro-F1 report for predictions against labels");
  c_eval->add_option("--pred", eval.pred, "Predictions: LGT1 logits (argmax) or AFF1 labels");
  c_eval->add_option("--truth", eval.truth, "Ground truth: AFF1 labels or LGT1 logits (argmax)");
  c_eval->add_option("--logits-manifest", eval.logits_manifest, "Manifest of LGT1 files (pooled over videos)");
  c_eval->add_option("--manifest", eval.manifest, "Manifest of labeled AFF1 files matched by id");
  c_eval->add_option("--num-classes", eval.num_classes, "Number of classes")->capture_default_str();
  c_eval->add_option("--out", eval.out, "Report path (default stdout)");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Macro-F1 over a range of smoothing windows, as CSV");
  c_sweep->add_option("--logits-manifest", sweep.logits_manifest, "Manifest of LGT1 files")->required();
  c_sweep->add_option("--manifest", sweep.manifest, "Manifest of labeled AFF1 files matched by id")->required();
  c_sweep->add_option("--windows", sweep.windows, "Window range start:stop:step (inclusive)")->capture_default_str();
  c_sweep->add_option("--strategy", sweep.strategy, "Smoothing strategy")->check(CLI::IsMember({"mean", "median", "gaussian", "vote"}))->capture_default_str();
  c_sweep->add_option("--num-classes", sweep.num_classes, "Number of classes")->capture_default_str();
  c_sweep->add_option("--out", sweep.out, "CSV path (default stdout)");

  AugmentArgs augment;
  auto* c_augment = app.add_subcommand("augment", "Apply PadAug black boundary bars to PPM images");
  c_augment->add_option("--manifest", augment.manifest, "Manifest of PPM images")->required();
  c_augment->add_option("--out-dir", augment.out_dir, "Output directory")->required();
  c_augment->add_option("--probability", augment.cfg.probability, "Probability of padding an image")->capture_default_str();
  c_augment->add_option("--sides", augment.sides, "Enabled sides (left, right, top, bottom)")->delimiter(',')->capture_default_str();
  c_augment->add_option("--fraction-lo", augment.cfg.fraction_lo, "Smallest bar width as a fraction of the image side")->capture_default_str();
  c_augment->add_option("--fraction-hi", augment.cfg.fraction_hi, "Largest bar width as a fraction of the image side")->capture_default_str();
  c_augment->add_option("--max-sides", augment.cfg.max_sides_per_sample, "Maximum padded sides per image (1 or 2)")->capture_default_str();
  c_augment->add_option("--jitter", augment.cfg.jitter, "Maximum content shift in pixels")->capture_default_str();
  c_augment->add_option("--seed", augment.seed, "Random seed")->capture_default_str();
  c_augment->add_option("--jobs", augment.jobs, "Parallel images")->check(CLI::PositiveNumber)->capture_default_str();

  CropArgs crop;
  auto* c_crop = app.add_subcommand("crop", "Multi-scale square face crops from PPM frames and boxes");
  c_crop->add_option("--manifest", crop.manifest, "Manifest of PPM frames, each with \"box\": [cx, cy, side]")->required();
  c_crop->add_option("--out-dir", crop.out_dir, "Output directory")->required();
  c_crop->add_option("--out-side", crop.out_side, "Crop side in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  c_crop->add_option("--scales", crop.scales, "Crop scale factors")->delimiter(',')->capture_default_str();
  c_crop->add_option("--jobs", crop.jobs, "Parallel images")->check(CLI::PositiveNumber)->capture_default_str();

  FoldsArgs folds;
  auto* c_folds = app.add_subcommand("folds", "Video-level k-fold split as JSON");
  c_folds->add_option("--manifest", folds.manifest, "Manifest whose ids are split")->required();
  c_folds->add_option("--k", folds.k, "Number of folds")->capture_default_str();
  c_folds->add_option("--seed", folds.seed, "Random seed")->capture_default_str();
  c_folds->add_option("--out", folds.out, "Output path (default stdout)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic AFF1/AFA1 dataset with a manifest");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("--videos", synth.cfg.videos, "Number of videos")->capture_default_str();
  c_synth->add_option("--frames", synth.cfg.frames_per_video, "Frames per video")->capture_default_str();
  c_synth->add_option("--fps", synth.cfg.fps, "Video frame rate")->capture_default_str();
  c_synth->add_option("--visual-dim", synth.cfg.visual_dim, "Visual feature width")->capture_default_str();
  c_synth->add_option("--audio-dim", synth.cfg.audio_dim, "Audio feature width")->capture_default_str();
  c_synth->add_option("--audio-hop", synth.cfg.audio_hop, "Audio hop in seconds")->capture_default_str();
  c_synth->add_option("--label-flip", synth.cfg.label_flip, "Fraction of flipped labels")->capture_default_str();
  c_synth->add_option("--missing", synth.cfg.missing_fraction, "Fraction of MISSING labels")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << detail::one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (c_align->parsed()) cmd_align(align);
    else if (c_train->parsed()) cmd_train(train, out);
    else if (c_predict->parsed()) cmd_predict(predict);
    else if (c_smooth->parsed()) cmd_smooth(smooth);
    else if (c_eval->parsed()) cmd_eval(eval, out);
    else if (c_sweep->parsed()) cmd_sweep(sweep, out);
    else if (c_augment->parsed()) cmd_augment(augment);
    else if (c_crop->parsed()) cmd_crop(crop);
    else if (c_folds->parsed()) cmd_folds(folds, out);
    else if (c_synth->parsed()) cmd_synth(synth);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << detail::one_line(e.what()) << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: format: " << detail::one_line(e.what()) << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << detail::one_line(e.what()) << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: internal: " << detail::one_line(e.what()) << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace avexpr::cli
