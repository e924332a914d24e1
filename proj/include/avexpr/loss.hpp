#pragma once

#include <cmath>

#include "avexpr/class_weights.hpp"
#include "avexpr/layers.hpp"
#include "avexpr/matrix.hpp"

namespace avexpr {

struct LossResult {
  double loss = 0.0;
  Matrix grad_logits;
};

// Class-weighted cross-entropy against soft targets, averaged over rows:
//   loss = (1/B) * sum_b  -sum_c w_c * y_bc * log softmax(z_b)_c
// Each target row must sum to 1 (within 1e-6).
inline LossResult weighted_soft_ce(const Matrix& logits, const Matrix& targets, const ClassWeights& weights) {
  const auto batch = logits.rows();
  const auto classes = logits.cols();
  require_shape(targets, batch, classes, "weighted_soft_ce targets");
  if (static_cast<Eigen::Index>(weights.size()) != classes) {
    throw ShapeError("weighted_soft_ce: " + std::to_string(weights.size()) + " class weights for " +
                     std::to_string(classes) + " classes");
  }
  if (batch == 0) throw ShapeError("weighted_soft_ce: empty batch");
  require_finite(logits, "weighted_soft_ce logits");
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double s = targets.row(b).sum();
    if (std::abs(s - 1.0) > 1e-6) {
      throw ValidationError("weighted_soft_ce: target row " + std::to_string(b) + " sums to " + std::to_string(s));
    }
  }

  Eigen::Map<const Eigen::RowVectorXd> w(weights.w.data(), classes);
  LossResult r;
  r.grad_logits.resize(batch, classes);
  const double inv_b = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double mx = logits.row(b).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(b).array() - mx;
    const double lse = std::log(shifted.array().exp().sum());
    const Eigen::RowVectorXd log_p = shifted.array() - lse;
    const Eigen::RowVectorXd wy = w.array() * targets.row(b).array();
    total -= wy.dot(log_p);
    // d/dz_j = p_j * sum_c(w_c y_c) - w_j y_j
    r.grad_logits.row(b) = (log_p.array().exp() * wy.sum() - wy.array()) * inv_b;
  }
  r.loss = total * inv_b;
  return r;
}

}  // namespace avexpr
