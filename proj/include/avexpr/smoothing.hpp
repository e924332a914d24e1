#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avexpr/binary_io.hpp"
#include "avexpr/labels.hpp"
#include "avexpr/matrix.hpp"
#include "avexpr/metrics.hpp"

namespace avexpr {

enum class SmoothingStrategy { Mean, Median, Gaussian, Vote };

inline std::string_view to_string(SmoothingStrategy s) {
  switch (s) {
    case SmoothingStrategy::Mean: return "mean";
    case SmoothingStrategy::Median: return "median";
    case SmoothingStrategy::Gaussian: return "gaussian";
    case SmoothingStrategy::Vote: return "vote";
  }
  return "?";
}

inline SmoothingStrategy parse_strategy(std::string_view s) {
  if (s == "mean") return SmoothingStrategy::Mean;
  if (s == "median") return SmoothingStrategy::Median;
  if (s == "gaussian") return SmoothingStrategy::Gaussian;
  if (s == "vote") return SmoothingStrategy::Vote;
  throw ValidationError("unknown smoothing strategy '" + std::string(s) + "'");
}

struct SmoothingConfig {
  SmoothingStrategy strategy = SmoothingStrategy::Median;
  int window = 101;                     // 2k + 1
  std::optional<double> gaussian_sigma;  // defaults to window / 6

  int half_width() const noexcept { return window / 2; }
  double sigma() const { return gaussian_sigma.value_or(static_cast<double>(window) / 6.0); }

  void validate() const {
    if (window < 1 || window % 2 == 0) {
      throw ValidationError("smoothing window must be an odd integer >= 1, got " + std::to_string(window));
    }
    if (strategy == SmoothingStrategy::Gaussian && !(sigma() > 0.0)) throw ValidationError("gaussian sigma must be positive");
  }
};

// Per-row argmax; ties go to the smallest class index.
inline std::vector<ExpressionLabel> decide(const Matrix& logits) {
  if (logits.cols() > kNumClasses) throw ShapeError("decide: more than 8 classes");
  std::vector<ExpressionLabel> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(t, c) > logits(t, best)) best = c;
    }
    out.emplace_back(static_cast<int>(best));
  }
  return out;
}

namespace detail {

inline Matrix smooth_mean(const Matrix& x, int k) {
  const Eigen::Index n = x.rows();
  Matrix out(n, x.cols());
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - k);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + k);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (Eigen::Index i = lo; i <= hi; ++i) s += x(i, c);
      out(t, c) = s / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

inline Matrix smooth_gaussian(const Matrix& x, int k, double sigma) {
  const Eigen::Index n = x.rows();
  std::vector<double> w(static_cast<std::size_t>(2 * k + 1));
  for (int d = -k; d <= k; ++d) w[static_cast<std::size_t>(d + k)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
  Matrix out(n, x.cols());
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - k);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + k);
    double norm = 0.0;
    for (Eigen::Index i = lo; i <= hi; ++i) norm += w[static_cast<std::size_t>(i - t + k)];
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (Eigen::Index i = lo; i <= hi; ++i) s += w[static_cast<std::size_t>(i - t + k)] * x(i, c);
      out(t, c) = s / norm;
    }
  }
  return out;
}

// Sliding sorted window per channel. Even-sized (truncated) windows take the
// lower median, i.e. order statistic floor((n-1)/2).
inline Matrix smooth_median(const Matrix& x, int k) {
  const Eigen::Index n = x.rows();
  Matrix out(n, x.cols());
  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(2 * k + 1));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    sorted.clear();
    Eigen::Index lo = 0;
    Eigen::Index hi = -1;  // inclusive window bounds currently held
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index want_lo = std::max<Eigen::Index>(0, t - k);
      const Eigen::Index want_hi = std::min<Eigen::Index>(n - 1, t + k);
      while (hi < want_hi) {
        ++hi;
        const double v = x(hi, c);
        sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v);
      }
      while (lo < want_lo) {
        const double v = x(lo, c);
        sorted.erase(std::lower_bound(sorted.begin(), sorted.end(), v));
        ++lo;
      }
      out(t, c) = sorted[(sorted.size() - 1) / 2];
    }
  }
  return out;
}

// Majority of per-frame decisions in the window, as one-hot pseudo-logits.
inline Matrix smooth_vote(const Matrix& x, int k) {
  const Eigen::Index n = x.rows();
  const auto decisions = decide(x);
  std::vector<int> counts(static_cast<std::size_t>(x.cols()), 0);
  Matrix out = Matrix::Zero(n, x.cols());
  Eigen::Index lo = 0;
  Eigen::Index hi = -1;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index want_lo = std::max<Eigen::Index>(0, t - k);
    const Eigen::Index want_hi = std::min<Eigen::Index>(n - 1, t + k);
    while (hi < want_hi) ++counts[static_cast<std::size_t>(decisions[static_cast<std::size_t>(++hi)].index())];
    while (lo < want_lo) --counts[static_cast<std::size_t>(decisions[static_cast<std::size_t>(lo++)].index())];
    const auto winner = std::max_element(counts.begin(), counts.end()) - counts.begin();  // first max wins ties
    out(t, winner) = 1.0;
  }
  return out;
}

}  // namespace detail

// Temporal smoothing of a T x C logit sequence over the centered window
// N(t) = {t-k .. t+k}, truncated at the sequence ends. A window of 1 returns
// the input unchanged for every strategy.
inline Matrix smooth_logits(const Matrix& logits, const SmoothingConfig& cfg) {
  cfg.validate();
  if (logits.rows() < 1) throw ShapeError("smooth_logits: need at least one frame");
  require_finite(logits, "smooth_logits");
  if (cfg.window == 1) return logits;
  const int k = cfg.half_width();
  switch (cfg.strategy) {
    case SmoothingStrategy::Mean: return detail::smooth_mean(logits, k);
    case SmoothingStrategy::Median: return detail::smooth_median(logits, k);
    case SmoothingStrategy::Gaussian: return detail::smooth_gaussian(logits, k, cfg.sigma());
    case SmoothingStrategy::Vote: return detail::smooth_vote(logits, k);
  }
  return logits;
}

// Per-video logits with their ground truth.
struct LabeledLogits {
  Matrix logits;
  std::vector<ExpressionLabel> labels;
};

struct SweepRow {
  int window = 1;
  double macro_f1 = 0.0;
};

// Macro-F1 of smoothed decisions for each window; each video is smoothed on
// its own and the confusion matrices are pooled. MISSING frames are skipped.
inline std::vector<SweepRow> sweep_windows(std::span<const LabeledLogits> videos, SmoothingStrategy strategy,
                                           std::span<const int> windows, int num_classes = kNumClasses,
                                           std::optional<double> sigma = std::nullopt) {
  std::vector<SweepRow> rows;
  for (int w : windows) {
    SmoothingConfig cfg{strategy, w, sigma};
    cfg.validate();
    ConfusionMatrix pooled(num_classes);
    for (const auto& v : videos) {
      if (v.logits.rows() == 0) continue;
      const auto decisions = decide(smooth_logits(v.logits, cfg));
      pooled.merge(confusion(decisions, v.labels, num_classes));
    }
    rows.push_back({w, macro_f1(pooled).score});
  }
  return rows;
}

inline std::vector<SweepRow> sweep_windows(const Matrix& logits, std::span<const ExpressionLabel> labels,
                                           SmoothingStrategy strategy, std::span<const int> windows,
                                           int num_classes = kNumClasses) {
  const LabeledLogits one{logits, std::vector<ExpressionLabel>(labels.begin(), labels.end())};
  return sweep_windows(std::span<const LabeledLogits>(&one, 1), strategy, windows, num_classes);
}

// "start:stop:step" (inclusive stop) or a single integer.
inline std::vector<int> parse_window_range(std::string_view spec) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError("bad window spec '" + std::string(spec) + "'");
    return v;
  };
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ':') {
      parts.push_back(spec.substr(start, i - start));
      start = i + 1;
    }
  }
  std::vector<int> out;
  if (parts.size() == 1) {
    out.push_back(to_int(parts[0]));
  } else if (parts.size() == 2 || parts.size() == 3) {
    const int a = to_int(parts[0]);
    const int b = to_int(parts[1]);
    const int step = parts.size() == 3 ? to_int(parts[2]) : 2;
    if (step <= 0) throw ValidationError("window step must be positive");
    for (int w = a; w <= b; w += step) out.push_back(w);
  } else {
    throw ValidationError("bad window spec '" + std::string(spec) + "'");
  }
  for (int w : out) {
    if (w < 1 || w % 2 == 0) throw ValidationError("window " + std::to_string(w) + " is not odd and positive");
  }
  return out;
}

inline std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "window,macro_f1\n";
  char line[64];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%.6f\n", r.window, r.macro_f1);
    out += line;
  }
  return out;
}

// LGT1 logits file: "LGT1" | T u64 | C u32 | T*C x f32 row-major.
namespace lgt1 {
inline constexpr std::string_view kMagic = "LGT1";
inline constexpr std::size_t kHeaderSize = 4 + 8 + 4;
}  // namespace lgt1

inline io::Bytes encode_logits(const Matrix& logits) {
  io::ByteWriter w;
  w.put_bytes(lgt1::kMagic);
  w.put(static_cast<std::uint64_t>(logits.rows()));
  w.put(static_cast<std::uint32_t>(logits.cols()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) w.put(static_cast<float>(logits.data()[i]));
  return std::move(w).take();
}

inline Matrix decode_logits(std::span<const std::uint8_t> data) {
  if (io::read_magic(data) != lgt1::kMagic) throw FormatError("not an LGT1 file (bad magic)");
  io::ByteReader r(data);
  r.get_string(4);
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint32_t>();
  if (cols == 0 ? r.remaining() != 0 : (rows > r.remaining() / (4ull * cols) || r.remaining() != rows * cols * 4)) {
    throw CorruptionError("LGT1 payload length does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(r.get<float>());
  return m;
}

inline void write_logits(const Matrix& logits, const std::filesystem::path& path) {
  io::write_file(path, encode_logits(logits));
}

inline Matrix read_logits(const std::filesystem::path& path) { return decode_logits(io::read_file(path)); }

}  // namespace avexpr
