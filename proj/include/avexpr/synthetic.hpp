#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "avexpr/alignment.hpp"
#include "avexpr/error.hpp"
#include "avexpr/records.hpp"
#include "avexpr/rng.hpp"

namespace avexpr {

// Which modality carries class evidence at a frame.
enum class Reliability : std::uint8_t { None = 0, Visual = 1, Audio = 2, Both = 3 };

// Generator for audio-visual sequences with piecewise-constant expression
// labels. Each class has a random prototype per modality. At frames where a
// modality is reliable its feature is prototype + small noise, elsewhere it
// is pure noise. Reliability is drawn per run of `reliability_run` frames:
// visual with probability p_v, audio with p_a (disjoint), neither otherwise.
struct SyntheticConfig {
  int videos = 16;
  int frames_per_video = 600;
  double fps = 30.0;
  int visual_dim = 32;
  int audio_dim = 32;
  int num_classes = kNumClasses;
  double segment_mean = 120.0;  // frames; lengths ~ U(0.5, 1.5) * mean
  double label_flip = 0.15;     // observed label replaced by another class
  double missing_fraction = 0.0;
  double visual_reliable = 0.3;
  double audio_reliable = 0.3;
  int reliability_run = 6;
  double prototype_scale = 1.0;
  double signal_noise = 0.35;   // noise on reliable features
  double clutter_noise = 1.0;   // std of unreliable features
  double scale_noise = 0.1;     // per-crop-scale perturbation
  // Audio stream.
  double audio_hop = 1.0 / 30.0;
  double audio_sample_noise = 0.0;  // extra noise on every audio sample
  double audio_offset_max = 0.0;    // per-video clock offset ~ U(-max, max)
  bool audio_follows_reliability = true;  // false: every audio sample carries class evidence

  void validate() const {
    if (videos < 1 || frames_per_video < 1 || visual_dim < 1 || audio_dim < 1) throw ValidationError("synthetic: sizes must be positive");
    if (num_classes < 2 || num_classes > kNumClasses) throw ValidationError("synthetic: num_classes must be in [2, 8]");
    if (visual_reliable < 0 || audio_reliable < 0 || visual_reliable + audio_reliable > 1.0) {
      throw ValidationError("synthetic: reliability fractions must be disjoint probabilities");
    }
    if (!(fps > 0) || !(audio_hop > 0) || !(segment_mean >= 1)) throw ValidationError("synthetic: rates must be positive");
  }
};

struct SyntheticVideo {
  VideoSequence sequence;  // visual features + labels; no audio in the schema
  AudioTrack audio;
  std::vector<int> latent;               // noise-free class per frame
  std::vector<Reliability> reliability;  // per frame
};

inline std::vector<SyntheticVideo> generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng proto_rng = Rng(seed).fork(0);
  const auto make_prototypes = [&](int dim) {
    std::vector<std::vector<double>> p(static_cast<std::size_t>(cfg.num_classes), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& v : p) {
      for (auto& x : v) x = proto_rng.normal() * cfg.prototype_scale;
    }
    return p;
  };
  const auto visual_proto = make_prototypes(cfg.visual_dim);
  const auto audio_proto = make_prototypes(cfg.audio_dim);

  std::vector<SyntheticVideo> out;
  for (int v = 0; v < cfg.videos; ++v) {
    Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(v) + 1);
    SyntheticVideo vid;
    const auto n = static_cast<std::size_t>(cfg.frames_per_video);

    vid.latent.resize(n);
    int cls = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_classes)));
    for (std::size_t t = 0; t < n;) {
      const auto len = static_cast<std::size_t>(std::max(1.0, std::round(cfg.segment_mean * rng.uniform(0.5, 1.5))));
      for (std::size_t i = 0; i < len && t < n; ++i, ++t) vid.latent[t] = cls;
      cls = (cls + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_classes - 1)))) % cfg.num_classes;
    }

    vid.reliability.resize(n);
    for (std::size_t t = 0; t < n; t += static_cast<std::size_t>(cfg.reliability_run)) {
      const double u = rng.uniform();
      const Reliability r = u < cfg.visual_reliable ? Reliability::Visual
                            : u < cfg.visual_reliable + cfg.audio_reliable ? Reliability::Audio
                                                                           : Reliability::None;
      for (std::size_t i = t; i < std::min(n, t + static_cast<std::size_t>(cfg.reliability_run)); ++i) vid.reliability[i] = r;
    }

    auto& seq = vid.sequence;
    seq.video_id = "synth" + std::to_string(v);
    seq.fps = cfg.fps;
    seq.visual_dim = static_cast<std::size_t>(cfg.visual_dim);
    seq.audio_dim = 0;
    for (std::size_t t = 0; t < n; ++t) {
      FrameRecord rec;
      rec.frame_index = t;
      rec.timestamp = static_cast<double>(t) / cfg.fps;
      const bool reliable = vid.reliability[t] == Reliability::Visual || vid.reliability[t] == Reliability::Both;
      std::vector<double> base(seq.visual_dim);
      for (std::size_t d = 0; d < base.size(); ++d) {
        base[d] = reliable ? visual_proto[static_cast<std::size_t>(vid.latent[t])][d] + rng.normal() * cfg.signal_noise
                           : rng.normal() * cfg.clutter_noise;
      }
      for (auto& scale : rec.visual) {
        scale = base;
        for (auto& x : scale) x += rng.normal() * cfg.scale_noise;
      }
      if (rng.uniform() < cfg.missing_fraction) {
        rec.label = kMissing;
      } else if (rng.uniform() < cfg.label_flip) {
        const int other = (vid.latent[t] + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_classes - 1)))) % cfg.num_classes;
        rec.label = ExpressionLabel(other);
      } else {
        rec.label = ExpressionLabel(vid.latent[t]);
      }
      seq.records.push_back(std::move(rec));
    }

    // Audio sample j describes the content at true time j*hop and is
    // stamped with the video's clock offset added.
    const double offset = cfg.audio_offset_max > 0 ? rng.uniform(-cfg.audio_offset_max, cfg.audio_offset_max) : 0.0;
    const double duration = static_cast<double>(n) / cfg.fps;
    const auto count = static_cast<std::size_t>(std::floor(duration / cfg.audio_hop));
    std::vector<std::vector<double>> feats(count, std::vector<double>(static_cast<std::size_t>(cfg.audio_dim)));
    for (std::size_t j = 0; j < count; ++j) {
      const double when = static_cast<double>(j) * cfg.audio_hop;
      const auto frame = std::min(n - 1, static_cast<std::size_t>(std::llround(when * cfg.fps)));
      const bool reliable = !cfg.audio_follows_reliability || vid.reliability[frame] == Reliability::Audio ||
                            vid.reliability[frame] == Reliability::Both;
      for (std::size_t d = 0; d < feats[j].size(); ++d) {
        double x = reliable ? audio_proto[static_cast<std::size_t>(vid.latent[frame])][d] + rng.normal() * cfg.signal_noise
                            : rng.normal() * cfg.clutter_noise;
        if (cfg.audio_sample_noise > 0) x += rng.normal() * cfg.audio_sample_noise;
        feats[j][d] = x;
      }
    }
    vid.audio = AudioTrack::regular(offset, cfg.audio_hop, std::move(feats), static_cast<std::size_t>(cfg.audio_dim));
    out.push_back(std::move(vid));
  }
  return out;
}

}  // namespace avexpr
