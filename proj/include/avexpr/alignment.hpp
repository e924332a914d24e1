#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avexpr/binary_io.hpp"
#include "avexpr/error.hpp"
#include "avexpr/records.hpp"

namespace avexpr {

// Acoustic feature stream z_tau for one video, at a constant hop.
class AudioTrack {
 public:
  static constexpr double kHopTolerance = 1e-6;  // seconds

  AudioTrack() = default;

  AudioTrack(std::size_t dim, double hop, std::vector<double> timestamps, std::vector<std::vector<double>> features)
      : dim_(dim), hop_(hop), timestamps_(std::move(timestamps)), features_(std::move(features)) {
    if (!(hop_ > 0.0) || !std::isfinite(hop_)) throw ValidationError("AudioTrack: hop must be positive");
    if (timestamps_.size() != features_.size()) throw ValidationError("AudioTrack: timestamp/feature count mismatch");
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (features_[i].size() != dim_) throw ValidationError("AudioTrack: feature " + std::to_string(i) + " has wrong dimension");
      if (!std::isfinite(timestamps_[i])) throw ValidationError("AudioTrack: non-finite timestamp");
      if (i > 0) {
        const double step = timestamps_[i] - timestamps_[i - 1];
        if (!(step > 0.0)) throw ValidationError("AudioTrack: timestamps not strictly increasing at " + std::to_string(i));
        if (std::abs(step - hop_) > kHopTolerance) {
          throw ValidationError("AudioTrack: step " + std::to_string(step) + " at " + std::to_string(i) +
                                " deviates from hop " + std::to_string(hop_));
        }
      }
    }
  }

  // Evenly spaced track starting at `start`.
  static AudioTrack regular(double start, double hop, std::vector<std::vector<double>> features, std::size_t dim) {
    std::vector<double> ts(features.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = start + static_cast<double>(i) * hop;
    return AudioTrack(dim, hop, std::move(ts), std::move(features));
  }

  std::size_t dim() const noexcept { return dim_; }
  double hop() const noexcept { return hop_; }
  std::size_t size() const noexcept { return timestamps_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }
  const std::vector<double>& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::vector<double>>& features() const noexcept { return features_; }

  friend bool operator==(const AudioTrack&, const AudioTrack&) = default;

 private:
  std::size_t dim_ = 0;
  double hop_ = 0.02;
  std::vector<double> timestamps_;
  std::vector<std::vector<double>> features_;
};

enum class AlignMode { Nearest, WindowMean };

struct AlignmentConfig {
  AlignMode mode = AlignMode::WindowMean;
  double window = 0.5;  // seconds, full width, WindowMean only
};

// Slack added to the closed window boundary so that timestamps computed as
// start + i*hop are not dropped by rounding.
inline constexpr double kWindowBoundarySlack = 1e-9;

// Indices of Omega_t: every feature with |timestamp - frame_time| <= window/2.
inline std::pair<std::size_t, std::size_t> window_range(const AudioTrack& track, double frame_time, double window) {
  const auto& ts = track.timestamps();
  const double half = window / 2.0 + kWindowBoundarySlack;
  const auto lo = std::lower_bound(ts.begin(), ts.end(), frame_time - half);
  const auto hi = std::upper_bound(lo, ts.end(), frame_time + half);
  return {static_cast<std::size_t>(lo - ts.begin()), static_cast<std::size_t>(hi - ts.begin())};
}

// Frame-level acoustic feature f_t^a, or nullopt when no feature qualifies.
inline std::optional<std::vector<double>> align_audio(const AudioTrack& track, double frame_time, const AlignmentConfig& cfg) {
  if (track.empty()) return std::nullopt;
  const auto& ts = track.timestamps();
  if (cfg.mode == AlignMode::Nearest) {
    const auto it = std::lower_bound(ts.begin(), ts.end(), frame_time);
    std::size_t best = static_cast<std::size_t>(it - ts.begin());
    if (best == ts.size()) {
      best = ts.size() - 1;
    } else if (best > 0 && std::abs(ts[best - 1] - frame_time) <= std::abs(ts[best] - frame_time)) {
      --best;  // ties go to the earlier feature
    }
    return track.features()[best];
  }

  if (!(cfg.window > 0.0)) throw ValidationError("align_audio: window must be positive");
  const auto [lo, hi] = window_range(track, frame_time, cfg.window);
  if (lo == hi) return std::nullopt;
  std::vector<double> mean(track.dim(), 0.0);
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& z = track.features()[i];
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += z[d];
  }
  const double n = static_cast<double>(hi - lo);
  for (auto& v : mean) v /= n;
  return mean;
}

// f_t^v: elementwise mean of the three crop-scale features.
inline std::vector<double> average_multiscale(const FrameRecord& rec) {
  const std::size_t dim = rec.visual[0].size();
  for (const auto& v : rec.visual) {
    if (v.empty() || v.size() != dim) {
      throw ValidationError("average_multiscale: frame " + std::to_string(rec.frame_index) + " is missing a scale feature");
    }
  }
  std::vector<double> out(dim);
  for (std::size_t d = 0; d < dim; ++d) out[d] = (rec.visual[0][d] + rec.visual[1][d] + rec.visual[2][d]) / 3.0;
  return out;
}

struct FramePair {
  std::uint64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<double> visual;
  std::optional<std::vector<double>> audio;
  ExpressionLabel label;
};

inline std::vector<FramePair> build_frame_pairs(const VideoSequence& seq, const AudioTrack& track, const AlignmentConfig& cfg) {
  validate(seq);
  std::vector<FramePair> out;
  out.reserve(seq.records.size());
  for (const auto& rec : seq.records) {
    out.push_back({rec.frame_index, rec.timestamp, average_multiscale(rec), align_audio(track, rec.timestamp, cfg), rec.label});
  }
  return out;
}

// Copy of `seq` whose audio slots hold the aligned track features.
inline VideoSequence attach_audio(const VideoSequence& seq, const AudioTrack& track, const AlignmentConfig& cfg) {
  validate(seq);
  VideoSequence out = seq;
  out.audio_dim = track.dim();
  for (auto& rec : out.records) {
    rec.audio = out.audio_dim > 0 ? align_audio(track, rec.timestamp, cfg) : std::nullopt;
  }
  return out;
}

// AFA1 audio feature file, little-endian:
//   "AFA1" | D_a u32 | hop f64 | count u64 | count x (timestamp f64 | D_a x f32)
namespace afa1 {
inline constexpr std::string_view kMagic = "AFA1";
inline constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8;
}  // namespace afa1

inline io::Bytes encode_audio_file(const AudioTrack& track) {
  io::ByteWriter w;
  w.put_bytes(afa1::kMagic);
  w.put(static_cast<std::uint32_t>(track.dim()));
  w.put(track.hop());
  w.put(static_cast<std::uint64_t>(track.size()));
  for (std::size_t i = 0; i < track.size(); ++i) {
    w.put(track.timestamps()[i]);
    w.put_f32s(track.features()[i]);
  }
  return std::move(w).take();
}

inline AudioTrack decode_audio_file(std::span<const std::uint8_t> data) {
  if (io::read_magic(data) != afa1::kMagic) throw FormatError("not an AFA1 file (bad magic)");
  io::ByteReader r(data);
  r.get_string(4);
  const std::size_t dim = r.get<std::uint32_t>();
  const double hop = r.get<double>();
  const auto count = r.get<std::uint64_t>();
  const std::size_t per_record = 8 + 4 * dim;
  if (count > r.remaining() / per_record || r.remaining() != count * per_record) {
    throw CorruptionError("AFA1 payload length does not match header count " + std::to_string(count));
  }
  std::vector<double> ts(count);
  std::vector<std::vector<double>> feats(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ts[i] = r.get<double>();
    feats[i] = r.get_f32s(dim);
  }
  return AudioTrack(dim, hop, std::move(ts), std::move(feats));
}

inline void write_audio_file(const AudioTrack& track, const std::filesystem::path& path) {
  io::write_file(path, encode_audio_file(track));
}

inline AudioTrack read_audio_file(const std::filesystem::path& path) { return decode_audio_file(io::read_file(path)); }

}  // namespace avexpr
