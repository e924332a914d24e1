#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "avexpr/error.hpp"

namespace avexpr {

// Row-major dense matrix; the carrier for features, parameters and
// gradients. Vectors are 1 x n matrices when they travel as parameters.
template <typename T>
using BasicMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;
using Vector = Eigen::VectorXd;

inline std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}

template <typename Derived>
std::string shape_of(const Eigen::MatrixBase<Derived>& m) {
  return shape_str(m.rows(), m.cols());
}

template <typename Derived>
void require_shape(const Eigen::MatrixBase<Derived>& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(what) + ": expected " + shape_str(rows, cols) + ", got " + shape_of(m));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entry");
}

// Copies a std::vector into a 1 x n row.
inline Matrix row_from(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

inline std::vector<double> to_std(const Matrix& row) {
  return std::vector<double>(row.data(), row.data() + row.size());
}

// Rows of `m` selected by `index`, in order.
template <typename T>
BasicMatrix<T> gather_rows(const BasicMatrix<T>& m, std::span<const std::size_t> index) {
  BasicMatrix<T> out(static_cast<Eigen::Index>(index.size()), m.cols());
  for (std::size_t i = 0; i < index.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(index[i]));
  return out;
}

// [a | b] column concatenation.
template <typename T>
BasicMatrix<T> hconcat(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows()) throw ShapeError("hconcat: row count mismatch " + shape_of(a) + " vs " + shape_of(b));
  BasicMatrix<T> out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

}  // namespace avexpr
