#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "avexpr/matrix.hpp"
#include "avexpr/rng.hpp"

namespace avexpr {

// ---------------------------------------------------------------------------
// Parameter bundles
// ---------------------------------------------------------------------------

template <typename T>
struct BasicLinearParams {
  BasicMatrix<T> weight;  // in x out
  BasicMatrix<T> bias;    // 1 x out

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }

  static BasicLinearParams zeros(Eigen::Index in, Eigen::Index out) {
    return {BasicMatrix<T>::Zero(in, out), BasicMatrix<T>::Zero(1, out)};
  }

  // Weights ~ U(-1/sqrt(in), 1/sqrt(in)), zero bias.
  static BasicLinearParams init(Eigen::Index in, Eigen::Index out, Rng& rng) {
    auto p = zeros(in, out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
    return p;
  }

  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + ".weight", self.weight);
    f(prefix + ".bias", self.bias);
  }
};

template <typename T>
struct BasicLayerNormParams {
  BasicMatrix<T> gain;  // 1 x n
  BasicMatrix<T> bias;  // 1 x n
  double eps = 1e-5;

  Eigen::Index dim() const { return gain.cols(); }

  static BasicLayerNormParams identity(Eigen::Index n, double eps = 1e-5) {
    return {BasicMatrix<T>::Ones(1, n), BasicMatrix<T>::Zero(1, n), eps};
  }

  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + ".gain", self.gain);
    f(prefix + ".bias", self.bias);
  }
};

using LinearParams = BasicLinearParams<double>;
using LayerNormParams = BasicLayerNormParams<double>;

// ---------------------------------------------------------------------------
// linear: out = x W + b
// ---------------------------------------------------------------------------

template <typename T>
BasicMatrix<T> linear(const BasicMatrix<T>& x, const BasicLinearParams<T>& p) {
  if (x.cols() != p.weight.rows()) {
    throw ShapeError("linear: input " + shape_of(x) + " does not match weight " + shape_of(p.weight));
  }
  require_shape(p.bias, 1, p.weight.cols(), "linear bias");
  BasicMatrix<T> out = x * p.weight;
  out.rowwise() += p.bias.row(0);
  return out;
}

template <typename T>
struct LinearBackward {
  BasicMatrix<T> grad_input;
  BasicLinearParams<T> grad;
};

template <typename T>
LinearBackward<T> linear_backward(const BasicMatrix<T>& x, const BasicLinearParams<T>& p,
                                  const BasicMatrix<T>& grad_out, bool need_input_grad = true) {
  require_shape(grad_out, x.rows(), p.weight.cols(), "linear_backward grad_out");
  LinearBackward<T> r;
  r.grad.weight = x.transpose() * grad_out;
  r.grad.bias = grad_out.colwise().sum();
  if (need_input_grad) r.grad_input = grad_out * p.weight.transpose();
  return r;
}

// ---------------------------------------------------------------------------
// layer_norm, per row, biased variance
// ---------------------------------------------------------------------------

template <typename T>
struct LayerNormTrace {
  BasicMatrix<T> normalized;  // (x - mean) / sqrt(var + eps)
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
};

template <typename T>
BasicMatrix<T> layer_norm(const BasicMatrix<T>& x, const BasicLayerNormParams<T>& p, LayerNormTrace<T>* trace = nullptr) {
  if (x.cols() < 1) throw ShapeError("layer_norm: need at least one column");
  require_shape(p.gain, 1, x.cols(), "layer_norm gain");
  require_shape(p.bias, 1, x.cols(), "layer_norm bias");
  const auto n = static_cast<T>(x.cols());
  BasicMatrix<T> xhat(x.rows(), x.cols());
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const T mean = x.row(i).sum() / n;
    const auto centered = (x.row(i).array() - mean).eval();
    const T var = centered.square().sum() / n;
    inv_std(i) = T(1) / std::sqrt(var + static_cast<T>(p.eps));
    xhat.row(i) = centered * inv_std(i);
  }
  BasicMatrix<T> out = (xhat.array().rowwise() * p.gain.row(0).array()).matrix();
  out.rowwise() += p.bias.row(0);
  if (trace != nullptr) {
    trace->normalized = std::move(xhat);
    trace->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename T>
struct LayerNormBackward {
  BasicMatrix<T> grad_input;
  BasicLayerNormParams<T> grad;
};

template <typename T>
LayerNormBackward<T> layer_norm_backward(const LayerNormTrace<T>& trace, const BasicLayerNormParams<T>& p,
                                         const BasicMatrix<T>& grad_out) {
  const auto& xhat = trace.normalized;
  require_shape(grad_out, xhat.rows(), xhat.cols(), "layer_norm_backward grad_out");
  LayerNormBackward<T> r;
  r.grad.gain = (grad_out.array() * xhat.array()).colwise().sum().matrix();
  r.grad.bias = grad_out.colwise().sum();
  r.grad.eps = p.eps;
  const BasicMatrix<T> dxhat = (grad_out.array().rowwise() * p.gain.row(0).array()).matrix();
  const auto n = static_cast<T>(xhat.cols());
  r.grad_input.resize(xhat.rows(), xhat.cols());
  for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
    const T mean_d = dxhat.row(i).sum() / n;
    const T mean_dx = dxhat.row(i).dot(xhat.row(i)) / n;
    r.grad_input.row(i) = trace.inv_std(i) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx).matrix();
  }
  return r;
}

// ---------------------------------------------------------------------------
// softmax (max-subtracted), sigmoid, GELU
// ---------------------------------------------------------------------------

template <typename T>
BasicMatrix<T> softmax_rows(const BasicMatrix<T>& x) {
  if (x.cols() < 1) throw ShapeError("softmax: need at least one column");
  BasicMatrix<T> out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const T mx = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

inline std::vector<double> softmax(std::span<const double> x) { return to_std(softmax_rows(row_from(x))); }

// Given y = softmax(x) row-wise and dL/dy, returns dL/dx.
template <typename T>
BasicMatrix<T> softmax_rows_backward(const BasicMatrix<T>& y, const BasicMatrix<T>& grad_y) {
  const auto inner = (y.array() * grad_y.array()).rowwise().sum().eval();
  return (y.array() * (grad_y.array().colwise() - inner)).matrix();
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
BasicMatrix<T> sigmoid(const BasicMatrix<T>& x) {
  return x.unaryExpr([](T v) { return sigmoid(v); });
}

// Exact GELU, x * Phi(x).
template <typename T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * static_cast<T>(std::numbers::sqrt2 / 2)));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * static_cast<T>(std::numbers::sqrt2 / 2)));
  const T pdf = std::exp(T(-0.5) * x * x) * static_cast<T>(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  return cdf + x * pdf;
}

template <typename T>
BasicMatrix<T> gelu(const BasicMatrix<T>& x) {
  return x.unaryExpr([](T v) { return gelu(v); });
}

template <typename T>
BasicMatrix<T> gelu_backward(const BasicMatrix<T>& x, const BasicMatrix<T>& grad_out) {
  return (x.unaryExpr([](T v) { return gelu_grad(v); }).array() * grad_out.array()).matrix();
}

// ---------------------------------------------------------------------------
// Inverted dropout
// ---------------------------------------------------------------------------

inline constexpr double kDefaultDropout = 0.1;

// Applies dropout and stores the scaled keep-mask (0 or 1/(1-p)) in *mask.
// At inference, or with p == 0, the input passes through and *mask is left
// empty.
template <typename T>
BasicMatrix<T> dropout(const BasicMatrix<T>& x, double p, Rng& rng, bool training, BasicMatrix<T>* mask = nullptr) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout: p must be in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) {
    if (mask != nullptr) mask->resize(0, 0);
    return x;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  BasicMatrix<T> m(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < p ? T(0) : keep_scale;
  BasicMatrix<T> out = (x.array() * m.array()).matrix();
  if (mask != nullptr) *mask = std::move(m);
  return out;
}

template <typename T>
BasicMatrix<T> dropout_backward(const BasicMatrix<T>& mask, const BasicMatrix<T>& grad_out) {
  if (mask.size() == 0) return grad_out;
  return (mask.array() * grad_out.array()).matrix();
}

}  // namespace avexpr
