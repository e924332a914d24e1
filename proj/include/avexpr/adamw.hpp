#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "avexpr/matrix.hpp"
#include "avexpr/params.hpp"

namespace avexpr {

struct AdamWState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

// One AdamW update with bias correction and decoupled weight decay:
//   p <- p - lr * wd * p - lr * m_hat / (sqrt(v_hat) + eps)
inline void adamw_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, AdamWState& state,
                       double lr, double weight_decay) {
  if (params.size() != grads.size()) throw ShapeError("adamw_step: parameter/gradient count mismatch");
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adamw_step: state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw ShapeError("adamw_step: gradient " + shape_of(g) + " for parameter " + shape_of(p));
    }
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square()).matrix();
    p *= (1.0 - lr * weight_decay);
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
  }
}

template <typename P>
void adamw_step(P& params, const P& grads, AdamWState& state, double lr, double weight_decay) {
  const auto p = tensor_refs(params);
  const auto g = tensor_refs(grads);
  adamw_step(std::span<Matrix* const>(p), std::span<const Matrix* const>(g), state, lr, weight_decay);
}

}  // namespace avexpr
