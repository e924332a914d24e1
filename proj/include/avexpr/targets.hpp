#pragma once

#include <span>
#include <vector>

#include "avexpr/error.hpp"
#include "avexpr/frame_set.hpp"
#include "avexpr/labels.hpp"
#include "avexpr/matrix.hpp"
#include "avexpr/rng.hpp"

namespace avexpr {

// Label-smoothed one-hot rows: (1 - eps) * onehot + eps / C.
inline Matrix soft_targets(std::span<const ExpressionLabel> labels, double smoothing, int num_classes = kNumClasses) {
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ValidationError("label smoothing must be in [0, 1)");
  Matrix y = Matrix::Constant(static_cast<Eigen::Index>(labels.size()), num_classes, smoothing / num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].is_missing()) throw ValidationError("soft_targets: MISSING label in training batch");
    const int c = labels[i].index();
    if (c >= num_classes) throw ValidationError("soft_targets: label outside class range");
    y(static_cast<Eigen::Index>(i), c) += 1.0 - smoothing;
  }
  return y;
}

// Convex combination of each row with row perm[i]:
//   x_i <- lambda * x_i + (1 - lambda) * x_perm[i]   (features and targets)
inline void mixup(FeatureBatch& x, Matrix& targets, double lambda, std::span<const std::size_t> perm) {
  if (perm.size() != static_cast<std::size_t>(x.size())) throw ShapeError("mixup: permutation size mismatch");
  const Matrix v = gather_rows(x.visual, perm);
  const Matrix a = gather_rows(x.audio, perm);
  const Matrix y = gather_rows(targets, perm);
  x.visual = lambda * x.visual + (1.0 - lambda) * v;
  x.audio = lambda * x.audio + (1.0 - lambda) * a;
  targets = lambda * targets + (1.0 - lambda) * y;
}

}  // namespace avexpr
