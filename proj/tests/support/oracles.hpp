#pragma once

// Independent reference implementations used by unit and acceptance tests.
// Nothing here calls into the code under test beyond plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "avexpr/imageops.hpp"
#include "avexpr/labels.hpp"
#include "avexpr/matrix.hpp"
#include "avexpr/rng.hpp"

namespace oracle {

using avexpr::Matrix;

// ---------------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------------

inline constexpr double kFdStep = 1e-4;

// Numerical gradient of f with respect to every entry of *x, by the
// fourth-order central stencil (8 (f(+h) - f(-h)) - (f(+2h) - f(-2h))) / 12h.
inline Matrix numeric_grad(Matrix* x, const std::function<double()>& f, double h = kFdStep) {
  Matrix g(x->rows(), x->cols());
  for (Eigen::Index i = 0; i < x->size(); ++i) {
    const double keep = x->data()[i];
    const auto at = [&](double d) {
      x->data()[i] = keep + d;
      const double v = f();
      x->data()[i] = keep;
      return v;
    };
    g.data()[i] = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  }
  return g;
}

// ||a - n|| / max(||a|| + ||n||, floor), Frobenius norms. The floor turns the
// comparison absolute for gradients that all but vanish (an expert whose
// routing weight is 1e-12 has a gradient near the roundoff of f itself).
inline constexpr double kRelativeErrorFloor = 1e-6;

inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double denom = std::max(analytic.norm() + numeric.norm(), kRelativeErrorFloor);
  return (analytic - numeric).norm() / denom;
}

// Worst relative error over a list of (tensor, analytic gradient) pairs.
inline double worst_relative_error(const std::vector<Matrix*>& tensors, const std::vector<Matrix>& analytic,
                                   const std::function<double()>& f, double h = kFdStep) {
  double worst = 0.0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric_grad(tensors[i], f, h)));
  }
  return worst;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, avexpr::Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
  return m;
}

// ---------------------------------------------------------------------------
// Macro-F1 by explicit TP/FP/FN recount
// ---------------------------------------------------------------------------

inline double brute_macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes) {
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (truth[i] < 0) continue;  // MISSING
      if (pred[i] == c && truth[i] == c) ++tp;
      else if (pred[i] == c) ++fp;
      else if (truth[i] == c) ++fn;
    }
    // F1 = 2TP / (2TP + FP + FN); the 0/0 case is 0.
    const long denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / num_classes;
}

// ---------------------------------------------------------------------------
// Temporal smoothing, recomputed frame by frame
// ---------------------------------------------------------------------------

enum class Smooth { Mean, Median, Gaussian, Vote };

inline Matrix brute_smooth(const Matrix& x, int window, Smooth kind, double sigma) {
  const auto T = static_cast<int>(x.rows());
  const auto C = static_cast<int>(x.cols());
  const int k = window / 2;
  Matrix out = Matrix::Zero(T, C);
  if (window == 1) return x;
  for (int t = 0; t < T; ++t) {
    const int lo = std::max(0, t - k);
    const int hi = std::min(T - 1, t + k);
    if (kind == Smooth::Vote) {
      std::vector<int> votes(static_cast<std::size_t>(C), 0);
      for (int s = lo; s <= hi; ++s) {
        int best = 0;
        for (int c = 1; c < C; ++c) {
          if (x(s, c) > x(s, best)) best = c;
        }
        ++votes[static_cast<std::size_t>(best)];
      }
      int win = 0;
      for (int c = 1; c < C; ++c) {
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(win)]) win = c;
      }
      out(t, win) = 1.0;
      continue;
    }
    for (int c = 0; c < C; ++c) {
      if (kind == Smooth::Median) {
        std::vector<double> vals;
        for (int s = lo; s <= hi; ++s) vals.push_back(x(s, c));
        std::sort(vals.begin(), vals.end());
        out(t, c) = vals[(vals.size() - 1) / 2];
      } else if (kind == Smooth::Mean) {
        double sum = 0.0;
        for (int s = lo; s <= hi; ++s) sum += x(s, c);
        out(t, c) = sum / (hi - lo + 1);
      } else {
        double sum = 0.0, wsum = 0.0;
        for (int s = lo; s <= hi; ++s) {
          const double w = std::exp(-0.5 * (s - t) * (s - t) / (sigma * sigma));
          sum += w * x(s, c);
          wsum += w;
        }
        out(t, c) = sum / wsum;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bilinear crop by direct formula, one pixel at a time
// ---------------------------------------------------------------------------

inline int brute_crop_pixel(const avexpr::RasterImage& img, double cx, double cy, double side, double scale, int out_side,
                            int col, int row, int ch) {
  const double crop = side * scale;
  const double sx = cx - crop / 2 + (col + 0.5) * crop / out_side - 0.5;
  const double sy = cy - crop / 2 + (row + 0.5) * crop / out_side - 0.5;
  const auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
    return img.at(x, y, ch);
  };
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double ax = sx - x0;
  const double ay = sy - y0;
  const double v = (1 - ax) * (1 - ay) * px(x0, y0) + ax * (1 - ay) * px(x0 + 1, y0) + (1 - ax) * ay * px(x0, y0 + 1) +
                   ax * ay * px(x0 + 1, y0 + 1);
  return static_cast<int>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace oracle
