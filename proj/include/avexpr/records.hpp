#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "avexpr/error.hpp"
#include "avexpr/labels.hpp"

namespace avexpr {

inline constexpr int kNumScales = 3;
// Crop scale factors, in storage order.
inline constexpr std::array<float, kNumScales> kCropScales = {0.9f, 1.2f, 1.5f};

struct FrameRecord {
  std::uint64_t frame_index = 0;
  double timestamp = 0.0;  // seconds
  // One feature vector per crop scale, ordered as kCropScales.
  std::array<std::vector<double>, kNumScales> visual;
  std::optional<std::vector<double>> audio;
  ExpressionLabel label;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct VideoSequence {
  std::string video_id;
  double fps = 30.0;
  std::size_t visual_dim = 0;  // D_v
  std::size_t audio_dim = 0;   // D_a; 0 means no audio in the schema
  std::vector<FrameRecord> records;

  bool has_audio_schema() const noexcept { return audio_dim > 0; }

  friend bool operator==(const VideoSequence&, const VideoSequence&) = default;
};

// Throws ValidationError on the first violated invariant.
inline void validate(const VideoSequence& seq) {
  if (seq.video_id.size() > 0xFFFF) throw ValidationError("video_id longer than 65535 bytes");
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) throw ValidationError("fps must be positive and finite");
  if (seq.visual_dim > 0xFFFFFFFFu || seq.audio_dim > 0xFFFFFFFFu) throw ValidationError("dimension exceeds u32");
  const FrameRecord* prev = nullptr;
  for (const auto& rec : seq.records) {
    const auto where = " (video " + seq.video_id + ", frame " + std::to_string(rec.frame_index) + ")";
    for (const auto& v : rec.visual) {
      if (v.size() != seq.visual_dim) throw ValidationError("visual dimension mismatch" + where);
    }
    if (rec.audio) {
      if (!seq.has_audio_schema()) throw ValidationError("audio present but schema has no audio" + where);
      if (rec.audio->size() != seq.audio_dim) throw ValidationError("audio dimension mismatch" + where);
    }
    if (!(rec.timestamp >= 0.0) || !std::isfinite(rec.timestamp)) {
      throw ValidationError("timestamp must be finite and >= 0" + where);
    }
    if (prev != nullptr) {
      if (rec.frame_index <= prev->frame_index) throw ValidationError("frame_index not strictly increasing" + where);
      if (rec.timestamp < prev->timestamp) throw ValidationError("timestamp decreasing" + where);
    }
    prev = &rec;
  }
}

}  // namespace avexpr
