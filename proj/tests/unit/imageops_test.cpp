#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "avexpr/imageops.hpp"
#include "support/oracles.hpp"

using namespace avexpr;

namespace {

RasterImage gradient(int w, int h) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(x * 255 / std::max(1, w - 1));
      img.at(x, y, 1) = static_cast<std::uint8_t>(y * 255 / std::max(1, h - 1));
      img.at(x, y, 2) = static_cast<std::uint8_t>((x + y) * 7 % 256);
    }
  }
  return img;
}

RasterImage white(int w, int h) {
  RasterImage img(w, h);
  std::fill(img.pixels.begin(), img.pixels.end(), 255);
  return img;
}

bool regen() { return std::getenv("AVEXPR_REGEN_GOLDEN") != nullptr; }

}  // namespace

TEST(Crop, InteriorUnitScaleIsLossless) {
  const auto img = gradient(32, 24);
  const auto out = crop_scaled(img, {16, 12, 10}, 1.0, 10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out.at(x, y, ch), img.at(11 + x, 7 + y, ch));
    }
  }
}

TEST(Crop, CornerBoxPadsWithBlack) {
  // Box centred on the top-left corner: three quadrants fall outside.
  const auto out = crop_scaled(white(16, 16), {0, 0, 8}, 1.0, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x < 4 || y < 4) {
        EXPECT_TRUE(out.is_black(x, y)) << x << "," << y;
      } else {
        EXPECT_EQ(out.at(x, y, 0), 255);
      }
    }
  }
}

TEST(Crop, BilinearTableMatchesDirectFormula) {
  const auto img = gradient(4, 4);
  for (double scale : {0.9, 1.2, 1.5, 2.0}) {
    for (int side : {3, 4, 7}) {
      const FaceBox box{1.7, 2.2, 2.5};
      const auto out = crop_scaled(img, box, scale, side);
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          for (int ch = 0; ch < 3; ++ch) {
            EXPECT_EQ(out.at(c, r, ch), oracle::brute_crop_pixel(img, box.cx, box.cy, box.side, scale, side, c, r, ch));
          }
        }
      }
    }
  }
}

TEST(Crop, BlackInBlackOut) {
  const auto out = crop_scaled(RasterImage(9, 9), {4, 4, 5}, 1.5, 12);
  for (auto p : out.pixels) EXPECT_EQ(p, 0);
}

TEST(Crop, RejectsDegenerateBox) {
  const RasterImage img(4, 4);
  EXPECT_THROW(crop_scaled(img, {1, 1, 0}, 1.0, 4), ValidationError);
  EXPECT_THROW(crop_scaled(img, {1, 1, 2}, 0.0, 4), ValidationError);
  EXPECT_THROW(crop_scaled(img, {1, 1, 2}, 1.0, 0), ValidationError);
}

TEST(PadAug, ZeroProbabilityIsIdentity) {
  const auto img = gradient(8, 8);
  PadAugConfig cfg;
  cfg.probability = 0.0;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(padaug(img, cfg, rng), img);
}

TEST(PadAug, LeftBarBlackensColumns) {
  const auto img = white(8, 8);
  const PadBar bar{PadSide::Left, 2, 0};
  const auto out = apply_pad_bars(img, std::span<const PadBar>(&bar, 1));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) EXPECT_EQ(out.is_black(x, y), x < 2);
  }
}

TEST(PadAug, ShiftMovesContentAwayFromBar) {
  const auto img = gradient(8, 8);
  const PadBar bar{PadSide::Top, 2, 1};
  const auto out = apply_pad_bars(img, std::span<const PadBar>(&bar, 1));
  for (int x = 0; x < 8; ++x) {
    EXPECT_TRUE(out.is_black(x, 1));
    EXPECT_EQ(out.at(x, 5, 1), img.at(x, 4, 1));
  }
}

TEST(PadAug, PreservesDimensionsAndBarGeometry) {
  const auto img = white(40, 30);
  PadAugConfig cfg;
  cfg.probability = 1.0;
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    Rng draw = rng.fork(static_cast<std::uint64_t>(i));
    Rng again = draw;
    const auto bars = draw_pad_bars(40, 30, cfg, draw);
    ASSERT_GE(bars.size(), 1u);
    ASSERT_LE(bars.size(), 2u);
    const auto out = padaug(img, cfg, again);
    EXPECT_EQ(out.width, 40);
    EXPECT_EQ(out.height, 30);
    for (const auto& b : bars) {
      const int extent = (b.side == PadSide::Left || b.side == PadSide::Right) ? 40 : 30;
      EXPECT_GE(b.thickness, static_cast<int>(std::lround(0.05 * extent)));
      EXPECT_LE(b.thickness, static_cast<int>(std::lround(0.25 * extent)));
      EXPECT_LE(b.shift, cfg.jitter);
      if (b.side == PadSide::Left) {
        for (int y = 0; y < 30; ++y) EXPECT_TRUE(out.is_black(0, y));
      }
    }
    if (bars.size() == 2) EXPECT_NE(bars[0].side, bars[1].side);
  }
}

TEST(PadAug, FixedSeedGolden) {
  const auto path = std::filesystem::path(AVEXPR_GOLDEN_DIR) / "padaug_8x8.ppm";
  PadAugConfig cfg;
  cfg.probability = 1.0;
  cfg.max_sides_per_sample = 2;
  Rng rng(2024);
  const auto out = padaug(gradient(8, 8), cfg, rng);
  if (regen()) write_ppm(out, path);
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden " << path;
  EXPECT_EQ(encode_ppm(out), io::read_file(path));
}

TEST(Ppm, RoundTrip) {
  const auto img = gradient(5, 3);
  const auto bytes = encode_ppm(img);
  EXPECT_EQ(bytes.size(), std::string("P6\n5 3\n255\n").size() + 45);
  EXPECT_EQ(decode_ppm(bytes), img);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_ppm(cut), CorruptionError);
  io::Bytes p3(bytes);
  p3[1] = '3';
  EXPECT_THROW(decode_ppm(p3), FormatError);
}
