#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "avexpr/error.hpp"
#include "avexpr/labels.hpp"

namespace avexpr {

// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = kNumClasses)
      : num_classes_(num_classes), counts_(static_cast<std::size_t>(num_classes * num_classes), 0) {
    if (num_classes < 1 || num_classes > kNumClasses) throw ValidationError("ConfusionMatrix: num_classes must be in [1, 8]");
  }

  int num_classes() const noexcept { return num_classes_; }

  std::uint64_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
  void add(int truth, int pred, std::uint64_t n = 1) { counts_[index(truth, pred)] += n; }

  void merge(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_) throw ValidationError("ConfusionMatrix::merge: class count differs");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  }

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
  }

  std::uint64_t support(int c) const {
    std::uint64_t n = 0;
    for (int p = 0; p < num_classes_; ++p) n += at(c, p);
    return n;
  }

  std::uint64_t predicted(int c) const {
    std::uint64_t n = 0;
    for (int t = 0; t < num_classes_; ++t) n += at(t, c);
    return n;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int truth, int pred) const {
    if (truth < 0 || truth >= num_classes_ || pred < 0 || pred >= num_classes_) {
      throw ValidationError("ConfusionMatrix: class index out of range");
    }
    return static_cast<std::size_t>(truth * num_classes_ + pred);
  }

  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

// Tallies (truth, pred) pairs, skipping frames whose truth is MISSING.
// Predictions must be total: a MISSING prediction is a validation error.
inline ConfusionMatrix confusion(std::span<const ExpressionLabel> pred, std::span<const ExpressionLabel> truth,
                                 int num_classes = kNumClasses) {
  if (pred.size() != truth.size()) {
    throw ValidationError("confusion: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].is_missing()) throw ValidationError("confusion: prediction " + std::to_string(i) + " is MISSING");
    if (truth[i].is_missing()) continue;
    cm.add(truth[i].index(), pred[i].index());
  }
  return cm;
}

struct F1Result {
  double score = 0.0;               // macro mean over all classes
  std::vector<double> per_class;    // F1
  std::vector<double> precision;
  std::vector<double> recall;
};

// Macro-averaged F1. Any 0/0 in precision, recall or F1 is taken as 0, and
// classes without support still count in the mean.
inline F1Result macro_f1(const ConfusionMatrix& cm) {
  const int n = cm.num_classes();
  F1Result r;
  r.per_class.resize(static_cast<std::size_t>(n));
  r.precision.resize(static_cast<std::size_t>(n));
  r.recall.resize(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int c = 0; c < n; ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto pred = static_cast<double>(cm.predicted(c));
    const auto support = static_cast<double>(cm.support(c));
    const double precision = pred > 0 ? tp / pred : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const auto i = static_cast<std::size_t>(c);
    r.precision[i] = precision;
    r.recall[i] = recall;
    r.per_class[i] = f1;
    sum += f1;
  }
  r.score = sum / static_cast<double>(n);
  return r;
}

inline double macro_f1_score(std::span<const ExpressionLabel> pred, std::span<const ExpressionLabel> truth,
                             int num_classes = kNumClasses) {
  return macro_f1(confusion(pred, truth, num_classes)).score;
}

// JSON evaluation report:
//   {macro_f1, per_class[C], support[C], n_eval_frames,
//    macro_f1_present_classes}
// The last field is the alternative convention that averages only over
// classes with non-zero support.
inline nlohmann::json eval_report(const ConfusionMatrix& cm) {
  const auto f1 = macro_f1(cm);
  nlohmann::json j;
  j["macro_f1"] = f1.score;
  j["per_class"] = f1.per_class;
  std::vector<std::uint64_t> support;
  double present_sum = 0.0;
  int present = 0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    support.push_back(cm.support(c));
    if (support.back() > 0) {
      present_sum += f1.per_class[static_cast<std::size_t>(c)];
      ++present;
    }
  }
  j["support"] = support;
  j["n_eval_frames"] = cm.total();
  j["macro_f1_present_classes"] = present > 0 ? present_sum / present : 0.0;
  return j;
}

}  // namespace avexpr
