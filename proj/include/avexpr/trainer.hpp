#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "avexpr/adamw.hpp"
#include "avexpr/class_weights.hpp"
#include "avexpr/folds.hpp"
#include "avexpr/frame_set.hpp"
#include "avexpr/fusion.hpp"
#include "avexpr/loss.hpp"
#include "avexpr/metrics.hpp"
#include "avexpr/moe_head.hpp"
#include "avexpr/smoothing.hpp"
#include "avexpr/targets.hpp"

namespace avexpr {

enum class HeadKind { MoE, Gated, ConcatLinear, ConcatMlp };

inline std::string_view to_string(HeadKind k) {
  switch (k) {
    case HeadKind::MoE: return "moe";
    case HeadKind::Gated: return "gated";
    case HeadKind::ConcatLinear: return "concat-linear";
    case HeadKind::ConcatMlp: return "concat-mlp";
  }
  return "?";
}

inline HeadKind parse_head_kind(std::string_view s) {
  if (s == "moe") return HeadKind::MoE;
  if (s == "gated") return HeadKind::Gated;
  if (s == "concat-linear") return HeadKind::ConcatLinear;
  if (s == "concat-mlp") return HeadKind::ConcatMlp;
  throw ValidationError("unknown head kind '" + std::string(s) + "'");
}

struct TrainConfig {
  int epochs = 12;
  double lr_head = 3e-4;
  double weight_decay = 1e-2;
  int batch_size = 64;
  double label_smoothing = 0.1;
  double mixup_alpha = 0.2;  // 0 disables mixup
  std::uint64_t seed = 0;
  bool class_weighted = true;
  double dropout = kDefaultDropout;
  int num_classes = kNumClasses;
  Eigen::Index fusion_hidden = 512;  // d
  Eigen::Index moe_hidden = 0;       // H; 0 means H = D_v
  int num_experts = 4;               // M

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(lr_head >= 0.0)) throw ValidationError("learning rate must be >= 0");
    if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw ValidationError("label smoothing must be in [0, 1)");
    if (!(mixup_alpha >= 0.0)) throw ValidationError("mixup alpha must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must be in [0, 1)");
    if (num_classes < 1 || num_classes > kNumClasses) throw ValidationError("num_classes must be in [1, 8]");
    if (fusion_hidden < 1 || moe_hidden < 0 || num_experts < 1) throw ValidationError("head dimensions must be positive");
  }
};

// ---------------------------------------------------------------------------
// Head parameters of any kind
// ---------------------------------------------------------------------------

using HeadParams = std::variant<MoEHeadParams, GatedFusionParams, BaselineFusionParams>;

inline HeadKind kind_of(const HeadParams& h) {
  if (std::holds_alternative<MoEHeadParams>(h)) return HeadKind::MoE;
  if (std::holds_alternative<GatedFusionParams>(h)) return HeadKind::Gated;
  return std::get<BaselineFusionParams>(h).kind == BaselineKind::ConcatLinear ? HeadKind::ConcatLinear : HeadKind::ConcatMlp;
}

inline HeadParams init_head(HeadKind kind, Eigen::Index visual_dim, Eigen::Index audio_dim, const TrainConfig& cfg, Rng& rng) {
  HeadParams h;
  switch (kind) {
    case HeadKind::MoE: {
      auto p = MoEHeadParams::init({visual_dim, cfg.moe_hidden > 0 ? cfg.moe_hidden : visual_dim, cfg.num_experts, cfg.num_classes}, rng);
      p.dropout = cfg.dropout;
      h = std::move(p);
      break;
    }
    case HeadKind::Gated: {
      auto p = GatedFusionParams::init({visual_dim, audio_dim, cfg.fusion_hidden, cfg.num_classes}, rng);
      p.dropout = cfg.dropout;
      h = std::move(p);
      break;
    }
    case HeadKind::ConcatLinear:
    case HeadKind::ConcatMlp: {
      const auto bk = kind == HeadKind::ConcatLinear ? BaselineKind::ConcatLinear : BaselineKind::ConcatMlp;
      auto p = BaselineFusionParams::init(bk, {visual_dim, audio_dim, cfg.fusion_hidden, cfg.num_classes}, rng);
      p.dropout = cfg.dropout;
      h = std::move(p);
      break;
    }
  }
  return h;
}

inline std::size_t param_count(const HeadParams& h) {
  return std::visit([](const auto& p) { return count_parameters(p); }, h);
}

template <typename Model>
Matrix predict_with(const typename Model::Params& p, const FeatureBatch& x) {
  constexpr Eigen::Index kChunk = 4096;
  Rng unused(0);
  Matrix out;
  for (Eigen::Index start = 0; start < x.size(); start += kChunk) {
    const auto n = std::min(kChunk, x.size() - start);
    FeatureBatch part{x.visual.middleRows(start, n), x.audio.middleRows(start, n)};
    Matrix logits = Model::logits(Model::forward(p, part, unused, false));
    if (start == 0) out.resize(x.size(), logits.cols());
    out.middleRows(start, n) = logits;
  }
  return out;
}

// Inference-mode logits (dropout off), B x C.
inline Matrix predict_logits(const HeadParams& h, const FeatureBatch& x) {
  if (x.size() == 0) {
    const auto classes = std::visit([](const auto& p) -> Eigen::Index {
      using P = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<P, MoEHeadParams>) return p.num_classes();
      else if constexpr (std::is_same_v<P, GatedFusionParams>) return p.head.out_dim();
      else return p.num_classes();
    }, h);
    return Matrix(0, classes);
  }
  return std::visit([&](const auto& p) -> Matrix {
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, MoEHeadParams>) return predict_with<MoEModel>(p, x);
    else if constexpr (std::is_same_v<P, GatedFusionParams>) return predict_with<GatedModel>(p, x);
    else return predict_with<BaselineModel>(p, x);
  }, h);
}

// Per-video logits and labels of a frame set, frames kept in stored order.
inline std::vector<LabeledLogits> video_logits(const HeadParams& h, const FrameSet& data) {
  std::vector<LabeledLogits> out;
  const Matrix all = predict_logits(h, data.all());
  for (const auto& vid : data.videos()) {
    const auto idx = data.frames_of({vid});
    LabeledLogits v;
    v.logits = gather_rows(all, idx);
    for (auto i : idx) v.labels.push_back(data.labels[i]);
    out.push_back(std::move(v));
  }
  return out;
}

inline double evaluate_macro_f1(const HeadParams& h, const FrameSet& data, int num_classes) {
  const auto pred = decide(predict_logits(h, data.all()));
  return macro_f1_score(pred, data.labels, num_classes);
}

inline double evaluate_smoothed_macro_f1(const HeadParams& h, const FrameSet& data, const SmoothingConfig& smoothing,
                                         int num_classes) {
  const auto videos = video_logits(h, data);
  const int windows[] = {smoothing.window};
  return sweep_windows(videos, smoothing.strategy, windows, num_classes, smoothing.gaussian_sigma).front().macro_f1;
}

// ---------------------------------------------------------------------------
// Checkpoints: NTC1 parameter tensors plus two metadata tensors
// ("meta.head_kind", "meta.visual_dim").
// ---------------------------------------------------------------------------

inline TensorList checkpoint_tensors(const HeadParams& h) {
  auto tensors = std::visit([](const auto& p) { return to_tensors(p); }, h);
  const auto visual_dim = std::visit([](const auto& p) -> Eigen::Index {
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, MoEHeadParams>) return p.input_dim();
    else if constexpr (std::is_same_v<P, GatedFusionParams>) return p.proj_visual.in_dim();
    else return p.visual_dim;
  }, h);
  tensors.push_back({"meta.head_kind", {1}, {static_cast<float>(static_cast<int>(kind_of(h)))}});
  tensors.push_back({"meta.visual_dim", {1}, {static_cast<float>(visual_dim)}});
  return tensors;
}

inline HeadParams head_from_tensors(const TensorList& tensors) {
  const TensorIndex index(tensors);
  const auto meta = [&](const std::string& name) {
    const auto& t = index.at(name);
    if (t.data.size() != 1) throw FormatError("checkpoint metadata '" + name + "' must hold one value");
    return static_cast<int>(t.data[0]);
  };
  const int kind = meta("meta.head_kind");
  switch (kind) {
    case static_cast<int>(HeadKind::MoE): return MoEHeadParams::from_tensors(index);
    case static_cast<int>(HeadKind::Gated): return GatedFusionParams::from_tensors(index);
    case static_cast<int>(HeadKind::ConcatLinear):
    case static_cast<int>(HeadKind::ConcatMlp): return BaselineFusionParams::from_tensors(index, meta("meta.visual_dim"));
    default: throw FormatError("checkpoint has unknown head kind " + std::to_string(kind));
  }
}

inline void save_checkpoint(const HeadParams& h, const std::filesystem::path& path) { write_tensors(checkpoint_tensors(h), path); }
inline HeadParams load_checkpoint(const std::filesystem::path& path) { return head_from_tensors(read_tensors(path)); }

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_macro_f1 = -1.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["best_epoch"] = best_epoch;
    j["best_val_macro_f1"] = best_val_macro_f1;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : epochs) {
      j["epochs"].push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_macro_f1", e.val_macro_f1}});
    }
    return j;
  }
};

struct TrainResult {
  HeadParams best;
  TrainHistory history;
};

namespace detail {

template <typename Model>
TrainResult train_typed(typename Model::Params params, const FrameSet& train, const FrameSet& val, const TrainConfig& cfg) {
  using Params = typename Model::Params;
  Rng rng = Rng(cfg.seed).fork(2);
  const ClassWeights weights = cfg.class_weighted ? compute_class_weights(train.labels, cfg.num_classes)
                                                  : ClassWeights::uniform(cfg.num_classes);
  AdamWState state;
  TrainResult result{params, {}};
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      FeatureBatch x = train.batch(idx);
      std::vector<ExpressionLabel> labels;
      for (auto i : idx) labels.push_back(train.labels[i]);
      Matrix y = soft_targets(labels, cfg.label_smoothing, cfg.num_classes);
      if (cfg.mixup_alpha > 0.0 && idx.size() > 1) {
        const double lambda = rng.beta(cfg.mixup_alpha, cfg.mixup_alpha);
        std::vector<std::size_t> perm(idx.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm.begin(), perm.end());
        mixup(x, y, lambda, perm);
      }
      const auto trace = Model::forward(params, x, rng, true);
      const auto loss = weighted_soft_ce(Model::logits(trace), y, weights);
      if (!std::isfinite(loss.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                            std::to_string(start) + " (lr=" + std::to_string(cfg.lr_head) + ")");
      }
      loss_sum += loss.loss * static_cast<double>(idx.size());
      const Params grads = Model::backward(params, trace, loss.grad_logits);
      adamw_step(params, grads, state, cfg.lr_head, cfg.weight_decay);
    }
    const HeadParams current = params;
    const double f1 = evaluate_macro_f1(current, val, cfg.num_classes);
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(train.size()), f1});
    if (f1 > result.history.best_val_macro_f1) {
      result.history.best_val_macro_f1 = f1;
      result.history.best_epoch = epoch;
      result.best = current;
    }
  }
  return result;
}

}  // namespace detail

// Trains `init` on `train` for cfg.epochs and returns the parameters of the
// epoch with the highest validation macro-F1 (earliest epoch on ties).
// Training frames must all be labeled.
inline TrainResult train_head(HeadParams init, const FrameSet& train, const TrainConfig& cfg, const FrameSet& val) {
  cfg.validate();
  if (train.empty()) throw ValidationError("train_head: empty training set");
  if (val.empty()) throw ValidationError("train_head: empty validation set");
  return std::visit([&](auto& p) -> TrainResult {
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, MoEHeadParams>) return detail::train_typed<MoEModel>(std::move(p), train, val, cfg);
    else if constexpr (std::is_same_v<P, GatedFusionParams>) return detail::train_typed<GatedModel>(std::move(p), train, val, cfg);
    else return detail::train_typed<BaselineModel>(std::move(p), train, val, cfg);
  }, init);
}

inline TrainResult train_head(const FrameSet& train, HeadKind kind, const TrainConfig& cfg, const FrameSet& val) {
  cfg.validate();
  if (train.empty()) throw ValidationError("train_head: empty training set");
  Rng init_rng = Rng(cfg.seed).fork(1);
  return train_head(init_head(kind, train.visual_dim(), train.audio_dim(), cfg, init_rng), train, cfg, val);
}

// ---------------------------------------------------------------------------
// k-fold cross-validation over videos
// ---------------------------------------------------------------------------

struct CrossValidationResult {
  FoldSplit split;
  std::vector<double> per_fold;  // best-epoch validation macro-F1
  double mean = 0.0;
  double stddev = 0.0;           // population standard deviation
  // Filled when a smoothing config is supplied.
  std::vector<double> per_fold_smoothed;
  double mean_smoothed = 0.0;
  double stddev_smoothed = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k"] = split.k;
    j["per_fold"] = per_fold;
    j["mean_f1"] = mean;
    j["std_f1"] = stddev;
    if (!per_fold_smoothed.empty()) {
      j["per_fold_smoothed"] = per_fold_smoothed;
      j["mean_f1_smoothed"] = mean_smoothed;
      j["std_f1_smoothed"] = stddev_smoothed;
    }
    return j;
  }
};

inline std::pair<double, double> mean_and_population_std(std::span<const double> v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

inline CrossValidationResult cross_validate(const FrameSet& data, int k, HeadKind kind, const TrainConfig& cfg,
                                            const std::optional<SmoothingConfig>& smoothing = std::nullopt) {
  CrossValidationResult r;
  const auto videos = data.videos();
  r.split = make_folds(videos, k, cfg.seed);
  for (int fold = 0; fold < k; ++fold) {
    const auto held_out = r.split.videos_in(fold);
    const std::set<std::string> held(held_out.begin(), held_out.end());
    std::set<std::string> rest;
    for (const auto& v : videos) {
      if (!held.contains(v)) rest.insert(v);
    }
    const FrameSet val = data.subset(data.frames_of(held));
    const FrameSet train = data.subset(data.frames_of(rest)).labeled();
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = Rng::mix(cfg.seed + static_cast<std::uint64_t>(fold));
    const auto result = train_head(train, kind, fold_cfg, val);
    r.per_fold.push_back(result.history.best_val_macro_f1);
    if (smoothing) r.per_fold_smoothed.push_back(evaluate_smoothed_macro_f1(result.best, val, *smoothing, cfg.num_classes));
  }
  std::tie(r.mean, r.stddev) = mean_and_population_std(r.per_fold);
  if (smoothing) std::tie(r.mean_smoothed, r.stddev_smoothed) = mean_and_population_std(r.per_fold_smoothed);
  return r;
}

}  // namespace avexpr
