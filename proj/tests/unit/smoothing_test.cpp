#include <gtest/gtest.h>

#include "avexpr/smoothing.hpp"
#include "support/oracles.hpp"

using namespace avexpr;

namespace {

const SmoothingStrategy kAll[] = {SmoothingStrategy::Mean, SmoothingStrategy::Median, SmoothingStrategy::Gaussian,
                                  SmoothingStrategy::Vote};

oracle::Smooth to_oracle(SmoothingStrategy s) {
  switch (s) {
    case SmoothingStrategy::Mean: return oracle::Smooth::Mean;
    case SmoothingStrategy::Median: return oracle::Smooth::Median;
    case SmoothingStrategy::Gaussian: return oracle::Smooth::Gaussian;
    case SmoothingStrategy::Vote: return oracle::Smooth::Vote;
  }
  return oracle::Smooth::Mean;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST(Smoothing, ConstantSequenceUnchanged) {
  Matrix x(20, 3);
  x.rowwise() = Eigen::RowVector3d(0.5, 2.0, -1.0);
  for (auto s : {SmoothingStrategy::Mean, SmoothingStrategy::Median, SmoothingStrategy::Gaussian}) {
    EXPECT_LT((smooth_logits(x, {s, 7, std::nullopt}) - x).cwiseAbs().maxCoeff(), 1e-15);
  }
  // vote emits one-hot rows of the (constant) argmax
  const Matrix v = smooth_logits(x, {SmoothingStrategy::Vote, 7, std::nullopt});
  EXPECT_EQ(v.col(1).sum(), 20.0);
  EXPECT_EQ(v.sum(), 20.0);
}

TEST(Smoothing, MedianRemovesSpikeMeanAttenuates) {
  const Matrix x = column({0, 0, 10, 0, 0});
  EXPECT_EQ(smooth_logits(x, {SmoothingStrategy::Median, 3, std::nullopt}), Matrix(Matrix::Zero(5, 1)));
  const Matrix m = smooth_logits(x, {SmoothingStrategy::Mean, 3, std::nullopt});
  EXPECT_NEAR(m(2, 0), 10.0 / 3, 1e-15);
  EXPECT_NEAR(m(1, 0), 10.0 / 3, 1e-15);
  EXPECT_EQ(m(0, 0), 0.0);
}

TEST(Smoothing, EvenTruncatedWindowUsesLowerMedian) {
  const Matrix x = column({4, 1, 9, 9, 2});
  const Matrix y = smooth_logits(x, {SmoothingStrategy::Median, 3, std::nullopt});
  EXPECT_EQ(y(0, 0), 1.0);  // {4, 1} -> lower median 1
  EXPECT_EQ(y(4, 0), 2.0);  // {9, 2} -> 2
  EXPECT_EQ(y(2, 0), 9.0);
}

TEST(Smoothing, WindowOneIsIdentity) {
  Rng rng(1);
  const Matrix x = oracle::random_matrix(30, 8, rng);
  for (auto s : kAll) EXPECT_EQ(smooth_logits(x, {s, 1, std::nullopt}), x);
}

TEST(Smoothing, EvenWindowRejected) {
  const Matrix x = Matrix::Zero(4, 2);
  EXPECT_THROW(smooth_logits(x, {SmoothingStrategy::Median, 4, std::nullopt}), ValidationError);
  EXPECT_THROW(smooth_logits(x, {SmoothingStrategy::Median, 0, std::nullopt}), ValidationError);
}

TEST(Smoothing, VoteTiesGoToSmallerClass) {
  Matrix x = Matrix::Zero(2, 3);
  x(0, 2) = 1.0;
  x(1, 1) = 1.0;
  const Matrix v = smooth_logits(x, {SmoothingStrategy::Vote, 3, std::nullopt});
  EXPECT_EQ(v(0, 1), 1.0);
  EXPECT_EQ(v(1, 1), 1.0);
}

TEST(Smoothing, AgreesWithBruteForceOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto T = static_cast<Eigen::Index>(1 + rng.below(80));
    const Matrix x = oracle::random_matrix(T, 8, rng);
    const int window = 1 + 2 * static_cast<int>(rng.below(20));
    for (auto s : kAll) {
      const SmoothingConfig cfg{s, window, std::nullopt};
      const Matrix got = smooth_logits(x, cfg);
      const Matrix want = oracle::brute_smooth(x, window, to_oracle(s), cfg.sigma());
      if (s == SmoothingStrategy::Median || s == SmoothingStrategy::Vote) {
        EXPECT_EQ(got, want);
      } else {
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(Smoothing, MedianIdempotentOnLongSegments) {
  Matrix x(60, 1);
  for (int t = 0; t < 60; ++t) x(t, 0) = (t / 20) % 2 == 0 ? 1.0 : -2.0;
  const SmoothingConfig cfg{SmoothingStrategy::Median, 9, std::nullopt};
  const Matrix once = smooth_logits(x, cfg);
  EXPECT_EQ(once, x);
  EXPECT_EQ(smooth_logits(once, cfg), once);
}

TEST(Decide, ArgmaxWithTieRule) {
  Matrix x(3, 4);
  x << 0, 5, 1, 2,
       1, 1, 1, 1,
       -3, -2, -1, -1;
  const auto d = decide(x);
  EXPECT_EQ(d[0], ExpressionLabel(1));
  EXPECT_EQ(d[1], ExpressionLabel(0));
  EXPECT_EQ(d[2], ExpressionLabel(2));
  EXPECT_TRUE(decide(Matrix(0, 8)).empty());
}

TEST(Decide, RandomAgainstLinearScan) {
  Rng rng(3);
  const Matrix x = oracle::random_matrix(10, 8, rng);
  const auto d = decide(x);
  for (int t = 0; t < 10; ++t) {
    int best = 0;
    for (int c = 0; c < 8; ++c) {
      if (x(t, c) > x(t, best)) best = c;
    }
    EXPECT_EQ(d[t].index(), best);
  }
}

TEST(Sweep, WindowOneIsUnsmoothedAndRowsDeterministic) {
  Rng rng(4);
  const Matrix x = oracle::random_matrix(50, 8, rng);
  std::vector<ExpressionLabel> labels;
  for (int t = 0; t < 50; ++t) labels.emplace_back(static_cast<int>(rng.below(8)));
  labels[3] = kMissing;
  const int windows[] = {1, 5, 5};
  const auto rows = sweep_windows(x, labels, SmoothingStrategy::Median, windows);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].macro_f1, macro_f1_score(decide(x), labels));
  EXPECT_EQ(rows[1].macro_f1, rows[2].macro_f1);
}

TEST(Sweep, InteriorMaximumOnNoisyPiecewiseConstantSequence) {
  // Segments of ~120 frames, 20% of frames carry a flipped label and a
  // logit peak on that wrong class. Exhaustive evaluation over the windows.
  Rng rng(5);
  const int T = 2400;
  std::vector<ExpressionLabel> truth;
  Matrix logits = Matrix::Zero(T, 8);
  int cls = 0;
  for (int t = 0; t < T;) {
    const int len = static_cast<int>(rng.uniform(60, 180));
    for (int i = 0; i < len && t < T; ++i, ++t) {
      truth.emplace_back(cls);
      const int shown = rng.uniform() < 0.2 ? (cls + 1 + static_cast<int>(rng.below(7))) % 8 : cls;
      for (int c = 0; c < 8; ++c) logits(t, c) = rng.normal() * 0.3 + (c == shown ? 1.0 : 0.0);
    }
    cls = (cls + 1 + static_cast<int>(rng.below(7))) % 8;
  }
  const auto windows = parse_window_range("1:401:10");
  const auto rows = sweep_windows(logits, truth, SmoothingStrategy::Median, windows);
  const auto best = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.macro_f1 < b.macro_f1; });
  EXPECT_NE(best, rows.begin());
  EXPECT_NE(best, rows.end() - 1);
  EXPECT_GT(best->macro_f1, rows.front().macro_f1 + 0.05);
}

TEST(WindowRange, Parsing) {
  EXPECT_EQ(parse_window_range("3:9:2"), (std::vector<int>{3, 5, 7, 9}));
  EXPECT_EQ(parse_window_range("101"), std::vector<int>{101});
  EXPECT_EQ(parse_window_range("3:205:2").size(), 102u);
  EXPECT_THROW(parse_window_range("4:10:2"), ValidationError);
  EXPECT_THROW(parse_window_range("3:9:0"), ValidationError);
  EXPECT_THROW(parse_window_range("a:b"), ValidationError);
}

TEST(WindowRange, CsvFormat) {
  const SweepRow rows[] = {{3, 0.5}, {5, 2.0 / 3}};
  EXPECT_EQ(sweep_csv(rows), "window,macro_f1\n3,0.500000\n5,0.666667\n");
}

TEST(Lgt1, RoundTripAndLayout) {
  Matrix x(3, 2);
  x << 1.5, -2, 0.25, 8, 1e-3, 7;
  const auto bytes = encode_logits(x);
  EXPECT_EQ(bytes.size(), lgt1::kHeaderSize + 6 * 4);
  const Matrix back = decode_logits(bytes);
  EXPECT_EQ(back.rows(), 3);
  EXPECT_EQ(back(0, 0), 1.5);
  EXPECT_EQ(encode_logits(back), bytes);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_logits(cut), CorruptionError);
}
