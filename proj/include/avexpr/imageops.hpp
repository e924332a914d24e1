#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "avexpr/binary_io.hpp"
#include "avexpr/error.hpp"
#include "avexpr/rng.hpp"

namespace avexpr {

// 8-bit RGB image, row-major, 3 bytes per pixel.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RasterImage() = default;
  RasterImage(int w, int h) : width(w), height(h), pixels(checked_size(w, h), 0) {}

  std::uint8_t& at(int x, int y, int ch) { return pixels[offset(x, y) + static_cast<std::size_t>(ch)]; }
  std::uint8_t at(int x, int y, int ch) const { return pixels[offset(x, y) + static_cast<std::size_t>(ch)]; }

  // Black outside the image.
  std::uint8_t sample(int x, int y, int ch) const {
    if (x < 0 || y < 0 || x >= width || y >= height) return 0;
    return at(x, y, ch);
  }

  void set_black(int x, int y) {
    for (int ch = 0; ch < 3; ++ch) at(x, y, ch) = 0;
  }

  bool is_black(int x, int y) const { return at(x, y, 0) == 0 && at(x, y, 1) == 0 && at(x, y, 2) == 0; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 1 || h < 1) throw ValidationError("RasterImage: width and height must be positive");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  }
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
};

// ---------------------------------------------------------------------------
// Binary PPM (P6, maxval 255)
// ---------------------------------------------------------------------------

inline io::Bytes encode_ppm(const RasterImage& img) {
  io::ByteWriter w;
  w.put_bytes("P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n");
  for (auto b : img.pixels) w.put(b);
  return std::move(w).take();
}

inline RasterImage decode_ppm(std::span<const std::uint8_t> data) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos]) != 0) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    long v = 0;
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(data[pos]) != 0 && v < 1'000'000) v = v * 10 + (data[pos++] - '0');
    if (pos == start) throw FormatError("PPM: malformed header");
    return static_cast<int>(v);
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '6') throw FormatError("not a binary PPM (P6) image");
  pos = 2;
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw FormatError("PPM: only maxval 255 is supported");
  if (pos >= data.size() || std::isspace(data[pos]) == 0) throw FormatError("PPM: malformed header");
  ++pos;
  RasterImage img(w, h);
  if (data.size() - pos != img.pixels.size()) throw CorruptionError("PPM: pixel payload length mismatch");
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end(), img.pixels.begin());
  return img;
}

inline void write_ppm(const RasterImage& img, const std::filesystem::path& path) { io::write_file(path, encode_ppm(img)); }
inline RasterImage read_ppm(const std::filesystem::path& path) { return decode_ppm(io::read_file(path)); }

// ---------------------------------------------------------------------------
// Multi-scale face cropping
// ---------------------------------------------------------------------------

// Square face box in source pixel coordinates; may extend past the image.
struct FaceBox {
  double cx = 0.0;
  double cy = 0.0;
  double side = 1.0;
};

// Crops the square of side scale*box.side centred on the box and resizes it
// to out_side x out_side with bilinear interpolation. Sampling uses pixel
// centres: output pixel j reads source coordinate
//   x0 + (j + 0.5) * (crop_side / out_side) - 0.5
// where integer coordinates are source pixel centres. Anything outside the
// source image reads as black.
inline RasterImage crop_scaled(const RasterImage& img, const FaceBox& box, double scale, int out_side) {
  if (!(box.side > 0.0) || !std::isfinite(box.side)) throw ValidationError("crop_scaled: degenerate face box");
  if (!(scale > 0.0)) throw ValidationError("crop_scaled: scale must be positive");
  if (out_side < 1) throw ValidationError("crop_scaled: out_side must be >= 1");
  const double crop = scale * box.side;
  const double x0 = box.cx - crop / 2.0;
  const double y0 = box.cy - crop / 2.0;
  const double step = crop / static_cast<double>(out_side);
  RasterImage out(out_side, out_side);
  for (int i = 0; i < out_side; ++i) {
    const double sy = y0 + (i + 0.5) * step - 0.5;
    const double fy0 = std::floor(sy);
    const double fy = sy - fy0;
    const int y = static_cast<int>(fy0);
    for (int j = 0; j < out_side; ++j) {
      const double sx = x0 + (j + 0.5) * step - 0.5;
      const double fx0 = std::floor(sx);
      const double fx = sx - fx0;
      const int x = static_cast<int>(fx0);
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - fx) * img.sample(x, y, ch) + fx * img.sample(x + 1, y, ch);
        const double bottom = (1.0 - fx) * img.sample(x, y + 1, ch) + fx * img.sample(x + 1, y + 1, ch);
        const double v = (1.0 - fy) * top + fy * bottom;
        out.at(j, i, ch) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PadAug: black boundary bars
// ---------------------------------------------------------------------------

enum class PadSide { Left, Right, Top, Bottom };

struct PadBar {
  PadSide side = PadSide::Left;
  int thickness = 0;  // pixels
  int shift = 0;      // content displacement away from the padded edge, <= thickness
};

struct PadAugConfig {
  double probability = 0.5;
  std::vector<PadSide> sides = {PadSide::Left, PadSide::Right, PadSide::Top, PadSide::Bottom};
  double fraction_lo = 0.05;
  double fraction_hi = 0.25;
  int max_sides_per_sample = 2;
  int jitter = 2;  // pixels

  void validate() const {
    if (!(probability >= 0.0 && probability <= 1.0)) throw ValidationError("PadAug: probability must be in [0, 1]");
    if (sides.empty()) throw ValidationError("PadAug: no sides enabled");
    if (!(fraction_lo > 0.0 && fraction_lo <= fraction_hi && fraction_hi < 0.5)) {
      throw ValidationError("PadAug: fraction range must satisfy 0 < lo <= hi < 0.5");
    }
    if (max_sides_per_sample != 1 && max_sides_per_sample != 2) throw ValidationError("PadAug: max_sides_per_sample must be 1 or 2");
    if (jitter < 0) throw ValidationError("PadAug: jitter must be >= 0");
  }
};

// Shifts content away from each bar's edge, then blackens the bar. The image
// size never changes.
inline RasterImage apply_pad_bars(const RasterImage& img, std::span<const PadBar> bars) {
  RasterImage out = img;
  for (const auto& bar : bars) {
    const bool horizontal = bar.side == PadSide::Left || bar.side == PadSide::Right;
    const int extent = horizontal ? out.width : out.height;
    const int thick = std::clamp(bar.thickness, 0, extent);
    const int shift = std::clamp(bar.shift, 0, thick);
    if (shift > 0) {
      const RasterImage src = out;
      for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
          int sx = x;
          int sy = y;
          switch (bar.side) {
            case PadSide::Left: sx = x - shift; break;
            case PadSide::Right: sx = x + shift; break;
            case PadSide::Top: sy = y - shift; break;
            case PadSide::Bottom: sy = y + shift; break;
          }
          for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = src.sample(sx, sy, ch);
        }
      }
    }
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        bool in_bar = false;
        switch (bar.side) {
          case PadSide::Left: in_bar = x < thick; break;
          case PadSide::Right: in_bar = x >= out.width - thick; break;
          case PadSide::Top: in_bar = y < thick; break;
          case PadSide::Bottom: in_bar = y >= out.height - thick; break;
        }
        if (in_bar) out.set_black(x, y);
      }
    }
  }
  return out;
}

// Draws the bars PadAug would apply; empty when the augmentation is skipped.
inline std::vector<PadBar> draw_pad_bars(int width, int height, const PadAugConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!rng.bernoulli(cfg.probability)) return {};
  std::vector<PadSide> sides = cfg.sides;
  rng.shuffle(sides.begin(), sides.end());
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_sides_per_sample), sides.size());
  const auto count = 1 + static_cast<std::size_t>(rng.below(limit));
  std::vector<PadBar> bars;
  for (std::size_t i = 0; i < count; ++i) {
    const auto side = sides[i];
    const int extent = (side == PadSide::Left || side == PadSide::Right) ? width : height;
    const double fraction = rng.uniform(cfg.fraction_lo, cfg.fraction_hi);
    const int thickness = static_cast<int>(std::lround(fraction * extent));
    const int shift = std::min(static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.jitter) + 1)), thickness);
    bars.push_back({side, thickness, shift});
  }
  return bars;
}

inline RasterImage padaug(const RasterImage& img, const PadAugConfig& cfg, Rng& rng) {
  const auto bars = draw_pad_bars(img.width, img.height, cfg, rng);
  if (bars.empty()) return img;
  return apply_pad_bars(img, bars);
}

}  // namespace avexpr
