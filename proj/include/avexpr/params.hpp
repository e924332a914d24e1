#pragma once

#include <string>
#include <vector>

#include "avexpr/matrix.hpp"
#include "avexpr/tensor_container.hpp"

namespace avexpr {

// Helpers over parameter bundles that expose
//   template <class Self, class F> static void visit(Self&, F&&)
// calling f(name, matrix) once per learnable tensor, in a fixed order.

template <typename P>
std::size_t count_parameters(const P& p) {
  std::size_t n = 0;
  P::visit(p, [&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <typename P>
std::vector<Matrix*> tensor_refs(P& p) {
  std::vector<Matrix*> out;
  P::visit(p, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

template <typename P>
std::vector<const Matrix*> tensor_refs(const P& p) {
  std::vector<const Matrix*> out;
  P::visit(p, [&](const std::string&, const Matrix& m) { out.push_back(&m); });
  return out;
}

template <typename P>
TensorList to_tensors(const P& p) {
  TensorList out;
  P::visit(p, [&](const std::string& name, const Matrix& m) { out.push_back(to_tensor(name, m)); });
  return out;
}

// Fills an already-shaped bundle from a checkpoint; every shape must match.
template <typename P>
void load_tensors(P& p, const TensorIndex& index) {
  P::visit(p, [&](const std::string& name, Matrix& m) {
    Matrix loaded = index.matrix(name);
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols()) {
      throw FormatError("tensor '" + name + "' has shape " + shape_of(loaded) + ", expected " + shape_of(m));
    }
    m = std::move(loaded);
  });
}

// Largest absolute difference over all tensors of two same-shaped bundles.
template <typename P>
double max_abs_diff(const P& a, const P& b) {
  const auto ra = tensor_refs(a);
  const auto rb = tensor_refs(b);
  double d = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d = std::max(d, (*ra[i] - *rb[i]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace avexpr
