#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "avexpr/binary_io.hpp"
#include "avexpr/error.hpp"
#include "avexpr/records.hpp"

namespace avexpr {

// AFF1 per-frame feature file, little-endian throughout.
//
//   header : "AFF1" | version u16 (=1) | flags u16 (bit0: audio in schema)
//            | id_len u16 | id bytes | fps f64 | frame_count u64
//            | n_scales u8 (=3) | scales 3 x f32 (0.9, 1.2, 1.5)
//            | D_v u32 | D_a u32
//   record : frame_index u64 | timestamp f64 | label u8 (255 = MISSING)
//            | audio_present u8 | visual 3*D_v x f32 | audio D_a x f32
//
// Absent audio is stored as zeros with audio_present = 0.
namespace aff1 {

inline constexpr std::string_view kMagic = "AFF1";
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kFlagAudio = 0x1;

inline constexpr std::size_t header_size(std::size_t id_len) {
  return 4 + 2 + 2 + 2 + id_len + 8 + 8 + 1 + 4 * kNumScales + 4 + 4;
}

inline constexpr std::size_t record_size(std::size_t visual_dim, std::size_t audio_dim) {
  return 8 + 8 + 1 + 1 + 4 * (kNumScales * visual_dim + audio_dim);
}

}  // namespace aff1

inline io::Bytes encode_feature_file(const VideoSequence& seq) {
  validate(seq);
  io::ByteWriter w;
  w.put_bytes(aff1::kMagic);
  w.put(aff1::kVersion);
  w.put(static_cast<std::uint16_t>(seq.has_audio_schema() ? aff1::kFlagAudio : 0));
  w.put(static_cast<std::uint16_t>(seq.video_id.size()));
  w.put_bytes(seq.video_id);
  w.put(seq.fps);
  w.put(static_cast<std::uint64_t>(seq.records.size()));
  w.put(static_cast<std::uint8_t>(kNumScales));
  for (float s : kCropScales) w.put(s);
  w.put(static_cast<std::uint32_t>(seq.visual_dim));
  w.put(static_cast<std::uint32_t>(seq.audio_dim));
  for (const auto& rec : seq.records) {
    w.put(rec.frame_index);
    w.put(rec.timestamp);
    w.put(rec.label.byte());
    w.put(static_cast<std::uint8_t>(rec.audio ? 1 : 0));
    for (const auto& v : rec.visual) w.put_f32s(v);
    if (rec.audio) {
      w.put_f32s(*rec.audio);
    } else {
      w.put_zeros(4 * seq.audio_dim);
    }
  }
  return std::move(w).take();
}

inline VideoSequence decode_feature_file(std::span<const std::uint8_t> data) {
  if (io::read_magic(data) != aff1::kMagic) throw FormatError("not an AFF1 file (bad magic)");
  io::ByteReader r(data);
  r.get_string(4);
  const auto version = r.get<std::uint16_t>();
  if (version != aff1::kVersion) throw FormatError("unsupported AFF1 version " + std::to_string(version));
  const auto flags = r.get<std::uint16_t>();
  if ((flags & ~aff1::kFlagAudio) != 0) throw FormatError("unknown AFF1 flag bits");

  VideoSequence seq;
  seq.video_id = r.get_string(r.get<std::uint16_t>());
  seq.fps = r.get<double>();
  const auto frame_count = r.get<std::uint64_t>();
  const auto n_scales = r.get<std::uint8_t>();
  if (n_scales != kNumScales) throw FormatError("AFF1 n_scales must be 3");
  for (float expected : kCropScales) {
    if (r.get<float>() != expected) throw FormatError("AFF1 scale table must be (0.9, 1.2, 1.5)");
  }
  seq.visual_dim = r.get<std::uint32_t>();
  seq.audio_dim = r.get<std::uint32_t>();
  if (((flags & aff1::kFlagAudio) != 0) != (seq.audio_dim > 0)) {
    throw FormatError("AFF1 audio flag disagrees with D_a");
  }

  const auto per_record = aff1::record_size(seq.visual_dim, seq.audio_dim);
  if (frame_count > r.remaining() / per_record || r.remaining() != frame_count * per_record) {
    throw CorruptionError("AFF1 payload length " + std::to_string(r.remaining()) + " does not match " +
                          std::to_string(frame_count) + " records of " + std::to_string(per_record) + " bytes");
  }

  seq.records.reserve(frame_count);
  for (std::uint64_t i = 0; i < frame_count; ++i) {
    FrameRecord rec;
    rec.frame_index = r.get<std::uint64_t>();
    rec.timestamp = r.get<double>();
    rec.label = ExpressionLabel::from_byte(r.get<std::uint8_t>());
    const auto present = r.get<std::uint8_t>();
    if (present > 1) throw CorruptionError("audio_present byte must be 0 or 1");
    for (auto& v : rec.visual) v = r.get_f32s(seq.visual_dim);
    auto audio = r.get_f32s(seq.audio_dim);
    if (present == 1) {
      rec.audio = std::move(audio);
    } else {
      for (double a : audio) {
        if (a != 0.0 || std::signbit(a)) throw CorruptionError("absent audio payload must be zero");
      }
    }
    seq.records.push_back(std::move(rec));
  }
  validate(seq);
  return seq;
}

inline void write_feature_file(const VideoSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_feature_file(seq);
  io::write_file(path, bytes);
}

inline VideoSequence read_feature_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return decode_feature_file(bytes);
}

}  // namespace avexpr
