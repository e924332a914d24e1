#pragma once

#include <string>
#include <vector>

#include "avexpr/frame_set.hpp"
#include "avexpr/layers.hpp"
#include "avexpr/params.hpp"

namespace avexpr {

struct MoEShape {
  Eigen::Index input_dim = 1024;  // D_v
  Eigen::Index hidden_dim = 1024;  // expert width H
  int num_experts = 4;             // M
  int num_classes = kNumClasses;   // C
};

struct ExpertParams {
  LinearParams fc1;  // D_v -> H
  LinearParams fc2;  // H -> D_v
};

// Mixture-of-experts classification head:
//
//   r     = LN_in(u)
//   alpha = softmax(router(r))                  (B x M)
//   e_m   = fc2_m(GELU(fc1_m(r)))               (B x D_v each)
//   u~    = sum_m alpha_m * e_m
//   logit = classifier(Drop(LN_out(u~)))
struct MoEHeadParams {
  LayerNormParams ln_in;
  LinearParams router;
  std::vector<ExpertParams> experts;
  LayerNormParams ln_out;
  LinearParams classifier;
  double dropout = kDefaultDropout;

  int num_experts() const noexcept { return static_cast<int>(experts.size()); }
  Eigen::Index input_dim() const noexcept { return router.in_dim(); }
  Eigen::Index hidden_dim() const noexcept { return experts.empty() ? 0 : experts.front().fc1.out_dim(); }
  int num_classes() const noexcept { return static_cast<int>(classifier.out_dim()); }
  MoEShape shape() const { return {input_dim(), hidden_dim(), num_experts(), num_classes()}; }

  static void check(const MoEShape& s) {
    if (s.input_dim < 1 || s.hidden_dim < 1 || s.num_experts < 1 || s.num_classes < 1) {
      throw ValidationError("MoE head: every dimension must be >= 1");
    }
  }

  static MoEHeadParams zeros(const MoEShape& s) {
    check(s);
    MoEHeadParams p;
    p.ln_in = LayerNormParams::identity(s.input_dim);
    p.router = LinearParams::zeros(s.input_dim, s.num_experts);
    p.experts.resize(static_cast<std::size_t>(s.num_experts));
    for (auto& e : p.experts) {
      e.fc1 = LinearParams::zeros(s.input_dim, s.hidden_dim);
      e.fc2 = LinearParams::zeros(s.hidden_dim, s.input_dim);
    }
    p.ln_out = LayerNormParams::identity(s.input_dim);
    p.classifier = LinearParams::zeros(s.input_dim, s.num_classes);
    return p;
  }

  static MoEHeadParams init(const MoEShape& s, Rng& rng) {
    check(s);
    MoEHeadParams p = zeros(s);
    p.router = LinearParams::init(s.input_dim, s.num_experts, rng);
    for (auto& e : p.experts) {
      e.fc1 = LinearParams::init(s.input_dim, s.hidden_dim, rng);
      e.fc2 = LinearParams::init(s.hidden_dim, s.input_dim, rng);
    }
    p.classifier = LinearParams::init(s.input_dim, s.num_classes, rng);
    return p;
  }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    LayerNormParams::visit(self.ln_in, "moe.ln_in", f);
    LinearParams::visit(self.router, "moe.router", f);
    for (std::size_t m = 0; m < self.experts.size(); ++m) {
      const std::string prefix = "moe.expert" + std::to_string(m);
      LinearParams::visit(self.experts[m].fc1, prefix + ".fc1", f);
      LinearParams::visit(self.experts[m].fc2, prefix + ".fc2", f);
    }
    LayerNormParams::visit(self.ln_out, "moe.ln_out", f);
    LinearParams::visit(self.classifier, "moe.classifier", f);
  }

  // Rebuilds a head from checkpoint tensors named "moe.*".
  static MoEHeadParams from_tensors(const TensorIndex& index) {
    int m = 0;
    while (index.contains("moe.expert" + std::to_string(m) + ".fc1.weight")) ++m;
    const auto router = index.matrix("moe.router.weight");
    const auto fc1 = index.matrix("moe.expert0.fc1.weight");
    const auto cls = index.matrix("moe.classifier.weight");
    MoEHeadParams p = zeros({router.rows(), fc1.cols(), m, static_cast<int>(cls.cols())});
    load_tensors(p, index);
    return p;
  }
};

inline std::size_t moe_param_count(const MoEHeadParams& p) {
  MoEHeadParams::check(p.shape());
  return count_parameters(p);
}

// Intermediate values kept for the backward pass.
struct MoETrace {
  Matrix input;
  LayerNormTrace<double> ln_in;
  Matrix normed;   // r
  Matrix routing;  // alpha
  std::vector<Matrix> expert_pre;  // fc1 output
  std::vector<Matrix> expert_act;  // GELU output
  std::vector<Matrix> expert_out;  // e_m
  Matrix mixed;    // u~
  LayerNormTrace<double> ln_out;
  Matrix drop_mask;
  Matrix dropped;
  Matrix logits;
};

inline MoETrace moe_forward(const Matrix& u, const MoEHeadParams& p, Rng& rng, bool training) {
  if (u.cols() != p.input_dim()) {
    throw ShapeError("moe_forward: input " + shape_of(u) + " but head expects D_v=" + std::to_string(p.input_dim()));
  }
  require_finite(u, "moe_forward input");
  MoETrace t;
  t.input = u;
  t.normed = layer_norm(u, p.ln_in, &t.ln_in);
  t.routing = softmax_rows(linear(t.normed, p.router));
  t.mixed = Matrix::Zero(u.rows(), u.cols());
  for (std::size_t m = 0; m < p.experts.size(); ++m) {
    t.expert_pre.push_back(linear(t.normed, p.experts[m].fc1));
    t.expert_act.push_back(gelu(t.expert_pre.back()));
    t.expert_out.push_back(linear(t.expert_act.back(), p.experts[m].fc2));
    t.mixed += (t.expert_out.back().array().colwise() * t.routing.col(static_cast<Eigen::Index>(m)).array()).matrix();
  }
  const Matrix out_normed = layer_norm(t.mixed, p.ln_out, &t.ln_out);
  t.dropped = dropout(out_normed, p.dropout, rng, training, &t.drop_mask);
  t.logits = linear(t.dropped, p.classifier);
  return t;
}

struct MoEBackward {
  MoEHeadParams grad;
  Matrix grad_input;
};

inline MoEBackward moe_backward(const MoEHeadParams& p, const MoETrace& t, const Matrix& grad_logits) {
  MoEBackward r;
  r.grad.dropout = p.dropout;
  r.grad.experts.resize(p.experts.size());

  auto cls = linear_backward(t.dropped, p.classifier, grad_logits);
  r.grad.classifier = std::move(cls.grad);
  const Matrix grad_normed_out = dropout_backward(t.drop_mask, cls.grad_input);
  auto ln_out = layer_norm_backward(t.ln_out, p.ln_out, grad_normed_out);
  r.grad.ln_out = std::move(ln_out.grad);
  const Matrix& grad_mixed = ln_out.grad_input;

  Matrix grad_routing(t.routing.rows(), t.routing.cols());
  Matrix grad_normed = Matrix::Zero(t.normed.rows(), t.normed.cols());
  for (std::size_t m = 0; m < p.experts.size(); ++m) {
    const auto col = static_cast<Eigen::Index>(m);
    grad_routing.col(col) = (grad_mixed.array() * t.expert_out[m].array()).rowwise().sum();
    const Matrix grad_e = (grad_mixed.array().colwise() * t.routing.col(col).array()).matrix();
    auto fc2 = linear_backward(t.expert_act[m], p.experts[m].fc2, grad_e);
    const Matrix grad_pre = gelu_backward(t.expert_pre[m], fc2.grad_input);
    auto fc1 = linear_backward(t.normed, p.experts[m].fc1, grad_pre);
    grad_normed += fc1.grad_input;
    r.grad.experts[m] = {std::move(fc1.grad), std::move(fc2.grad)};
  }
  const Matrix grad_scores = softmax_rows_backward(t.routing, grad_routing);
  auto router = linear_backward(t.normed, p.router, grad_scores);
  r.grad.router = std::move(router.grad);
  grad_normed += router.grad_input;

  auto ln_in = layer_norm_backward(t.ln_in, p.ln_in, grad_normed);
  r.grad.ln_in = std::move(ln_in.grad);
  r.grad_input = std::move(ln_in.grad_input);
  return r;
}

// Trainer adapter: the MoE head reads the visual stream only.
struct MoEModel {
  using Params = MoEHeadParams;
  using Trace = MoETrace;

  static Trace forward(const Params& p, const FeatureBatch& x, Rng& rng, bool training) {
    return moe_forward(x.visual, p, rng, training);
  }
  static const Matrix& logits(const Trace& t) { return t.logits; }
  static Params backward(const Params& p, const Trace& t, const Matrix& grad_logits) {
    return moe_backward(p, t, grad_logits).grad;
  }
};

}  // namespace avexpr
