#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "avexpr/error.hpp"
#include "avexpr/labels.hpp"

namespace avexpr {

// Per-class loss weights, mean-normalized to 1.
struct ClassWeights {
  std::vector<double> w;
  // Classes with no occurrences; their counts were clamped to 1.
  std::vector<int> clamped_classes;

  static ClassWeights uniform(int num_classes = kNumClasses) {
    return ClassWeights{std::vector<double>(static_cast<std::size_t>(num_classes), 1.0), {}};
  }

  std::size_t size() const noexcept { return w.size(); }
  double operator[](std::size_t c) const { return w[c]; }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (int c : clamped_classes) {
      out.push_back("class " + std::to_string(c) + " absent from labels; count clamped to 1");
    }
    return out;
  }
};

// Inverse-frequency weights w_c proportional to N / (C * n_c), rescaled so
// that mean(w) == 1. MISSING labels are ignored.
inline ClassWeights compute_class_weights(std::span<const ExpressionLabel> labels, int num_classes = kNumClasses) {
  if (num_classes < 1 || num_classes > kNumClasses) throw ValidationError("num_classes must be in [1, 8]");
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  double total = 0.0;
  for (const auto& l : labels) {
    if (l.is_missing()) continue;
    const int c = l.index();
    if (c >= num_classes) throw ValidationError("label " + std::to_string(c) + " outside class range");
    counts[static_cast<std::size_t>(c)] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) throw ValidationError("compute_class_weights: no valid (non-MISSING) labels");

  ClassWeights out;
  out.w.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0.0) {
      out.clamped_classes.push_back(static_cast<int>(c));
      counts[c] = 1.0;
    }
    out.w[c] = total / (static_cast<double>(num_classes) * counts[c]);
  }
  const double mean = std::accumulate(out.w.begin(), out.w.end(), 0.0) / static_cast<double>(num_classes);
  for (auto& v : out.w) v /= mean;
  return out;
}

}  // namespace avexpr
