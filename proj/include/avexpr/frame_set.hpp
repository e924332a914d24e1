#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "avexpr/alignment.hpp"
#include "avexpr/labels.hpp"
#include "avexpr/matrix.hpp"

namespace avexpr {

// Inputs for one forward pass. Rows of `audio` are zero where audio is absent.
struct FeatureBatch {
  Matrix visual;  // B x D_v
  Matrix audio;   // B x D_a

  Eigen::Index size() const noexcept { return visual.rows(); }
};

// Column-oriented collection of per-frame features with labels and the
// owning video of each frame.
struct FrameSet {
  Matrix visual;
  Matrix audio;
  std::vector<std::uint8_t> audio_present;
  std::vector<ExpressionLabel> labels;
  std::vector<std::string> video_ids;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  Eigen::Index visual_dim() const noexcept { return visual.cols(); }
  Eigen::Index audio_dim() const noexcept { return audio.cols(); }

  FeatureBatch batch(std::span<const std::size_t> index) const {
    return {gather_rows(visual, index), gather_rows(audio, index)};
  }

  FeatureBatch all() const { return {visual, audio}; }

  FrameSet subset(std::span<const std::size_t> index) const {
    FrameSet out;
    out.visual = gather_rows(visual, index);
    out.audio = gather_rows(audio, index);
    for (auto i : index) {
      out.audio_present.push_back(audio_present[i]);
      out.labels.push_back(labels[i]);
      out.video_ids.push_back(video_ids[i]);
    }
    return out;
  }

  // Frames whose label is not MISSING.
  FrameSet labeled() const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!labels[i].is_missing()) keep.push_back(i);
    }
    return subset(keep);
  }

  std::vector<std::size_t> frames_of(const std::set<std::string>& ids) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (ids.contains(video_ids[i])) out.push_back(i);
    }
    return out;
  }

  // Distinct video ids in first-appearance order.
  std::vector<std::string> videos() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& v : video_ids) {
      if (seen.insert(v).second) out.push_back(v);
    }
    return out;
  }

  // Unimodal views: the other modality is replaced by zeros, which turns a
  // concatenation head into a linear probe on the remaining modality.
  FrameSet visual_only() const {
    FrameSet out = *this;
    out.audio.setZero();
    std::fill(out.audio_present.begin(), out.audio_present.end(), 0);
    return out;
  }

  FrameSet audio_only() const {
    FrameSet out = *this;
    out.visual.setZero();
    return out;
  }

  void append(const FrameSet& other) {
    if (empty()) {
      *this = other;
      return;
    }
    if (other.visual_dim() != visual_dim() || other.audio_dim() != audio_dim()) {
      throw ShapeError("FrameSet::append: feature dimensions differ");
    }
    Matrix v(visual.rows() + other.visual.rows(), visual.cols());
    v << visual, other.visual;
    Matrix a(audio.rows() + other.audio.rows(), audio.cols());
    a << audio, other.audio;
    visual = std::move(v);
    audio = std::move(a);
    audio_present.insert(audio_present.end(), other.audio_present.begin(), other.audio_present.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    video_ids.insert(video_ids.end(), other.video_ids.begin(), other.video_ids.end());
  }

  static FrameSet from_pairs(const std::string& video_id, std::span<const FramePair> pairs, std::size_t visual_dim,
                             std::size_t audio_dim) {
    FrameSet out;
    const auto n = static_cast<Eigen::Index>(pairs.size());
    out.visual = Matrix::Zero(n, static_cast<Eigen::Index>(visual_dim));
    out.audio = Matrix::Zero(n, static_cast<Eigen::Index>(audio_dim));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = pairs[static_cast<std::size_t>(i)];
      if (p.visual.size() != visual_dim) throw ShapeError("FrameSet: visual dimension mismatch");
      for (std::size_t d = 0; d < visual_dim; ++d) out.visual(i, static_cast<Eigen::Index>(d)) = p.visual[d];
      const bool present = p.audio.has_value();
      if (present) {
        if (p.audio->size() != audio_dim) throw ShapeError("FrameSet: audio dimension mismatch");
        for (std::size_t d = 0; d < audio_dim; ++d) out.audio(i, static_cast<Eigen::Index>(d)) = (*p.audio)[d];
      }
      out.audio_present.push_back(present ? 1 : 0);
      out.labels.push_back(p.label);
      out.video_ids.push_back(video_id);
    }
    return out;
  }

  // Features of an AFF1 sequence whose audio slots are already aligned.
  static FrameSet from_sequence(const VideoSequence& seq) {
    std::vector<FramePair> pairs;
    pairs.reserve(seq.records.size());
    for (const auto& rec : seq.records) {
      pairs.push_back({rec.frame_index, rec.timestamp, average_multiscale(rec), rec.audio, rec.label});
    }
    return from_pairs(seq.video_id, pairs, seq.visual_dim, seq.audio_dim);
  }
};

}  // namespace avexpr
