#include <gtest/gtest.h>

#include "avexpr/metrics.hpp"
#include "support/oracles.hpp"

using namespace avexpr;

namespace {
std::vector<ExpressionLabel> labels(std::initializer_list<int> codes) {
  std::vector<ExpressionLabel> out;
  for (int c : codes) out.push_back(c < 0 ? kMissing : ExpressionLabel(c));
  return out;
}
}  // namespace

TEST(Confusion, DiagonalWhenPerfect) {
  const auto l = labels({0, 1, 2, 2, 7});
  const auto cm = confusion(l, l);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (i != j) EXPECT_EQ(cm.at(i, j), 0u);
    }
  }
  EXPECT_EQ(cm.at(2, 2), 2u);
  EXPECT_EQ(cm.total(), 5u);
}

TEST(Confusion, AllMissingTruthIsEmpty) {
  const auto cm = confusion(labels({0, 1, 2}), labels({-1, -1, -1}));
  EXPECT_EQ(cm.total(), 0u);
}

TEST(Confusion, SixFrameHandTally) {
  // truth: 0 0 1 1 2 M ; pred: 0 1 1 1 0 2
  const auto cm = confusion(labels({0, 1, 1, 1, 0, 2}), labels({0, 0, 1, 1, 2, -1}));
  EXPECT_EQ(cm.at(0, 0), 1u);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.at(1, 1), 2u);
  EXPECT_EQ(cm.at(2, 0), 1u);
  EXPECT_EQ(cm.total(), 5u);
  EXPECT_EQ(cm.support(0), 2u);
  EXPECT_EQ(cm.predicted(1), 3u);
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion(labels({0, 1}), labels({0})), ValidationError);
  EXPECT_THROW(confusion(labels({-1}), labels({0})), ValidationError);
}

TEST(MacroF1, PerfectIsOne) {
  const auto l = labels({0, 1, 2, 3, 4, 5, 6, 7});
  EXPECT_EQ(macro_f1_score(l, l), 1.0);
}

TEST(MacroF1, TwoClassHandExample) {
  const auto r = macro_f1(confusion(labels({0, 1, 1}), labels({0, 0, 1}), 2));
  EXPECT_EQ(r.per_class[0], 2.0 / 3);
  EXPECT_EQ(r.per_class[1], 2.0 / 3);
  EXPECT_EQ(r.score, 2.0 / 3);
}

TEST(MacroF1, AbsentClassCountsAsZero) {
  const auto l = labels({0, 1, 2, 3, 4, 5, 6});
  const auto r = macro_f1(confusion(l, l));
  EXPECT_EQ(r.per_class[7], 0.0);
  EXPECT_EQ(r.score, 7.0 / 8);
}

TEST(MacroF1, MatchesBruteForce) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = 2 + static_cast<int>(rng.below(7));
    const auto n = 1 + rng.below(60);
    std::vector<int> p, t;
    std::vector<ExpressionLabel> lp, lt;
    for (std::uint64_t i = 0; i < n; ++i) {
      p.push_back(static_cast<int>(rng.below(C)));
      t.push_back(rng.uniform() < 0.1 ? -1 : static_cast<int>(rng.below(C)));
      lp.emplace_back(p.back());
      lt.push_back(t.back() < 0 ? kMissing : ExpressionLabel(t.back()));
    }
    EXPECT_NEAR(macro_f1_score(lp, lt, C), oracle::brute_macro_f1(p, t, C), 1e-12);
  }
}

TEST(MacroF1, ClassPermutationInvariance) {
  Rng rng(2);
  std::vector<ExpressionLabel> p, t, pp, tp;
  const int perm[8] = {3, 7, 0, 5, 1, 6, 2, 4};
  for (int i = 0; i < 100; ++i) {
    const int a = static_cast<int>(rng.below(8)), b = static_cast<int>(rng.below(8));
    p.emplace_back(a);
    t.emplace_back(b);
    pp.emplace_back(perm[a]);
    tp.emplace_back(perm[b]);
  }
  const auto r1 = macro_f1(confusion(p, t));
  const auto r2 = macro_f1(confusion(pp, tp));
  EXPECT_NEAR(r1.score, r2.score, 1e-15);
  for (int c = 0; c < 8; ++c) EXPECT_EQ(r1.per_class[c], r2.per_class[perm[c]]);
}

TEST(EvalReport, Fields) {
  const auto l = labels({0, 1, 1, 2});
  const auto j = eval_report(confusion(l, l));
  EXPECT_EQ(j["macro_f1"].get<double>(), 3.0 / 8);
  EXPECT_EQ(j["per_class"].size(), 8u);
  EXPECT_EQ(j["support"][1].get<int>(), 2);
  EXPECT_EQ(j["n_eval_frames"].get<int>(), 4);
  EXPECT_EQ(j["macro_f1_present_classes"].get<double>(), 1.0);
}
