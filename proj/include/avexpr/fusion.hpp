#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avexpr/frame_set.hpp"
#include "avexpr/layers.hpp"
#include "avexpr/params.hpp"

namespace avexpr {

struct FusionShape {
  Eigen::Index visual_dim = 1024;  // D_v
  Eigen::Index audio_dim = 1024;   // D_a
  Eigen::Index hidden_dim = 512;   // d
  int num_classes = kNumClasses;

  void check() const {
    if (visual_dim < 1 || audio_dim < 1 || hidden_dim < 1 || num_classes < 1) {
      throw ValidationError("fusion head: every dimension must be >= 1");
    }
  }
};

// ===========================================================================
// Gated fusion
//
//   z_v = P_v f_v,  z_a = P_a f_a
//   g   = sigmoid(G [f_v; f_a])
//   h   = g * z_v + (1 - g) * z_a
//   logit = head(Drop(LN(h)))
//
// Absent audio enters as the zero vector, so P_a contributes its bias only
// and the gate sees zeros in the audio half of its input.
// ===========================================================================

struct GatedFusionParams {
  LinearParams proj_visual;  // D_v -> d
  LinearParams proj_audio;   // D_a -> d
  LinearParams gate;         // D_v + D_a -> d
  LayerNormParams ln;        // d
  LinearParams head;         // d -> C
  double dropout = kDefaultDropout;

  FusionShape shape() const {
    return {proj_visual.in_dim(), proj_audio.in_dim(), proj_visual.out_dim(), static_cast<int>(head.out_dim())};
  }

  static GatedFusionParams zeros(const FusionShape& s) {
    s.check();
    return {LinearParams::zeros(s.visual_dim, s.hidden_dim), LinearParams::zeros(s.audio_dim, s.hidden_dim),
            LinearParams::zeros(s.visual_dim + s.audio_dim, s.hidden_dim), LayerNormParams::identity(s.hidden_dim),
            LinearParams::zeros(s.hidden_dim, s.num_classes)};
  }

  static GatedFusionParams init(const FusionShape& s, Rng& rng) {
    s.check();
    return {LinearParams::init(s.visual_dim, s.hidden_dim, rng), LinearParams::init(s.audio_dim, s.hidden_dim, rng),
            LinearParams::init(s.visual_dim + s.audio_dim, s.hidden_dim, rng), LayerNormParams::identity(s.hidden_dim),
            LinearParams::init(s.hidden_dim, s.num_classes, rng)};
  }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    LinearParams::visit(self.proj_visual, "fuse.proj_v", f);
    LinearParams::visit(self.proj_audio, "fuse.proj_a", f);
    LinearParams::visit(self.gate, "fuse.gate", f);
    LayerNormParams::visit(self.ln, "fuse.ln", f);
    LinearParams::visit(self.head, "fuse.head", f);
  }

  static GatedFusionParams from_tensors(const TensorIndex& index) {
    const auto pv = index.matrix("fuse.proj_v.weight");
    const auto pa = index.matrix("fuse.proj_a.weight");
    const auto head = index.matrix("fuse.head.weight");
    auto p = zeros({pv.rows(), pa.rows(), pv.cols(), static_cast<int>(head.cols())});
    load_tensors(p, index);
    return p;
  }
};

struct GatedTrace {
  Matrix visual;
  Matrix audio;
  Matrix joint;  // [f_v ; f_a]
  Matrix z_visual;
  Matrix z_audio;
  Matrix gate;   // g
  Matrix fused;  // h
  LayerNormTrace<double> ln;
  Matrix drop_mask;
  Matrix dropped;
  Matrix logits;
};

inline GatedTrace gated_forward(const FeatureBatch& x, const GatedFusionParams& p, Rng& rng, bool training) {
  const auto s = p.shape();
  require_shape(x.visual, x.visual.rows(), s.visual_dim, "gated_forward visual");
  require_shape(x.audio, x.visual.rows(), s.audio_dim, "gated_forward audio");
  require_finite(x.visual, "gated_forward visual");
  require_finite(x.audio, "gated_forward audio");
  GatedTrace t;
  t.visual = x.visual;
  t.audio = x.audio;
  t.joint = hconcat(x.visual, x.audio);
  t.z_visual = linear(x.visual, p.proj_visual);
  t.z_audio = linear(x.audio, p.proj_audio);
  t.gate = sigmoid(linear(t.joint, p.gate));
  t.fused = (t.gate.array() * t.z_visual.array() + (1.0 - t.gate.array()) * t.z_audio.array()).matrix();
  const Matrix normed = layer_norm(t.fused, p.ln, &t.ln);
  t.dropped = dropout(normed, p.dropout, rng, training, &t.drop_mask);
  t.logits = linear(t.dropped, p.head);
  return t;
}

struct GatedOutput {
  std::vector<double> logits;
  std::vector<double> gate;
  std::vector<double> fused;
};

// Single-frame convenience form; nullopt audio means ABSENT.
inline GatedOutput gated_forward(std::span<const double> visual, const std::optional<std::vector<double>>& audio,
                                 const GatedFusionParams& p, Rng& rng, bool training) {
  FeatureBatch x{row_from(visual), Matrix::Zero(1, p.proj_audio.in_dim())};
  if (audio) {
    if (static_cast<Eigen::Index>(audio->size()) != p.proj_audio.in_dim()) throw ShapeError("gated_forward: audio dimension mismatch");
    x.audio = row_from(*audio);
  }
  const auto t = gated_forward(x, p, rng, training);
  return {to_std(t.logits), to_std(t.gate), to_std(t.fused)};
}

struct FusionBackward {
  Matrix grad_visual;
  Matrix grad_audio;
};

struct GatedBackward : FusionBackward {
  GatedFusionParams grad;
};

inline GatedBackward gated_backward(const GatedFusionParams& p, const GatedTrace& t, const Matrix& grad_logits) {
  GatedBackward r;
  r.grad.dropout = p.dropout;
  auto head = linear_backward(t.dropped, p.head, grad_logits);
  r.grad.head = std::move(head.grad);
  auto ln = layer_norm_backward(t.ln, p.ln, dropout_backward(t.drop_mask, head.grad_input));
  r.grad.ln = std::move(ln.grad);
  const Matrix& grad_h = ln.grad_input;

  const Matrix grad_zv = (t.gate.array() * grad_h.array()).matrix();
  const Matrix grad_za = ((1.0 - t.gate.array()) * grad_h.array()).matrix();
  const Matrix grad_gate_pre =
      (grad_h.array() * (t.z_visual.array() - t.z_audio.array()) * t.gate.array() * (1.0 - t.gate.array())).matrix();

  auto pv = linear_backward(t.visual, p.proj_visual, grad_zv);
  auto pa = linear_backward(t.audio, p.proj_audio, grad_za);
  auto g = linear_backward(t.joint, p.gate, grad_gate_pre);
  r.grad.proj_visual = std::move(pv.grad);
  r.grad.proj_audio = std::move(pa.grad);
  r.grad.gate = std::move(g.grad);
  r.grad_visual = pv.grad_input + g.grad_input.leftCols(t.visual.cols());
  r.grad_audio = pa.grad_input + g.grad_input.rightCols(t.audio.cols());
  return r;
}

struct GatedModel {
  using Params = GatedFusionParams;
  using Trace = GatedTrace;

  static Trace forward(const Params& p, const FeatureBatch& x, Rng& rng, bool training) {
    return gated_forward(x, p, rng, training);
  }
  static const Matrix& logits(const Trace& t) { return t.logits; }
  static Params backward(const Params& p, const Trace& t, const Matrix& grad_logits) {
    return gated_backward(p, t, grad_logits).grad;
  }
};

// ===========================================================================
// Concatenation baselines
//   CONCAT_LINEAR: logit = W [f_v; f_a] + b
//   CONCAT_MLP:    logit = head(Drop(LN(GELU(fc1([f_v; f_a])))))
// ===========================================================================

enum class BaselineKind { ConcatLinear, ConcatMlp };

struct BaselineFusionParams {
  BaselineKind kind = BaselineKind::ConcatLinear;
  Eigen::Index visual_dim = 0;
  LinearParams linear;  // ConcatLinear
  LinearParams fc1;     // ConcatMlp
  LayerNormParams ln;
  LinearParams head;
  double dropout = kDefaultDropout;

  Eigen::Index input_dim() const { return kind == BaselineKind::ConcatLinear ? linear.in_dim() : fc1.in_dim(); }
  Eigen::Index audio_dim() const { return input_dim() - visual_dim; }
  int num_classes() const {
    return static_cast<int>(kind == BaselineKind::ConcatLinear ? linear.out_dim() : head.out_dim());
  }

  static BaselineFusionParams zeros(BaselineKind kind, const FusionShape& s) {
    s.check();
    BaselineFusionParams p;
    p.kind = kind;
    p.visual_dim = s.visual_dim;
    const auto in = s.visual_dim + s.audio_dim;
    if (kind == BaselineKind::ConcatLinear) {
      p.linear = LinearParams::zeros(in, s.num_classes);
    } else {
      p.fc1 = LinearParams::zeros(in, s.hidden_dim);
      p.ln = LayerNormParams::identity(s.hidden_dim);
      p.head = LinearParams::zeros(s.hidden_dim, s.num_classes);
    }
    return p;
  }

  static BaselineFusionParams init(BaselineKind kind, const FusionShape& s, Rng& rng) {
    auto p = zeros(kind, s);
    const auto in = s.visual_dim + s.audio_dim;
    if (kind == BaselineKind::ConcatLinear) {
      p.linear = LinearParams::init(in, s.num_classes, rng);
    } else {
      p.fc1 = LinearParams::init(in, s.hidden_dim, rng);
      p.head = LinearParams::init(s.hidden_dim, s.num_classes, rng);
    }
    return p;
  }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    if (self.kind == BaselineKind::ConcatLinear) {
      LinearParams::visit(self.linear, "fuse.concat_linear", f);
    } else {
      LinearParams::visit(self.fc1, "fuse.mlp.fc1", f);
      LayerNormParams::visit(self.ln, "fuse.mlp.ln", f);
      LinearParams::visit(self.head, "fuse.mlp.head", f);
    }
  }

  // The split between visual and audio columns is not recoverable from the
  // weights alone, so the caller supplies D_v.
  static BaselineFusionParams from_tensors(const TensorIndex& index, Eigen::Index visual_dim) {
    if (index.contains("fuse.concat_linear.weight")) {
      const auto w = index.matrix("fuse.concat_linear.weight");
      auto p = zeros(BaselineKind::ConcatLinear, {visual_dim, w.rows() - visual_dim, 1, static_cast<int>(w.cols())});
      load_tensors(p, index);
      return p;
    }
    const auto fc1 = index.matrix("fuse.mlp.fc1.weight");
    const auto head = index.matrix("fuse.mlp.head.weight");
    auto p = zeros(BaselineKind::ConcatMlp, {visual_dim, fc1.rows() - visual_dim, fc1.cols(), static_cast<int>(head.cols())});
    load_tensors(p, index);
    return p;
  }
};

struct BaselineTrace {
  Matrix joint;
  Matrix pre;     // fc1 output (MLP)
  Matrix act;     // GELU output (MLP)
  LayerNormTrace<double> ln;
  Matrix drop_mask;
  Matrix dropped;
  Matrix logits;
};

inline BaselineTrace baseline_forward(const FeatureBatch& x, const BaselineFusionParams& p, Rng& rng, bool training) {
  if (x.visual.cols() != p.visual_dim || x.audio.cols() != p.audio_dim() || x.audio.rows() != x.visual.rows()) {
    throw ShapeError("baseline_forward: inputs " + shape_of(x.visual) + " / " + shape_of(x.audio) +
                     " do not match head (D_v=" + std::to_string(p.visual_dim) + ", D_a=" + std::to_string(p.audio_dim()) + ")");
  }
  require_finite(x.visual, "baseline_forward visual");
  require_finite(x.audio, "baseline_forward audio");
  BaselineTrace t;
  t.joint = hconcat(x.visual, x.audio);
  if (p.kind == BaselineKind::ConcatLinear) {
    t.logits = linear(t.joint, p.linear);
    return t;
  }
  t.pre = linear(t.joint, p.fc1);
  t.act = gelu(t.pre);
  const Matrix normed = layer_norm(t.act, p.ln, &t.ln);
  t.dropped = dropout(normed, p.dropout, rng, training, &t.drop_mask);
  t.logits = linear(t.dropped, p.head);
  return t;
}

inline std::vector<double> baseline_forward(std::span<const double> visual, const std::optional<std::vector<double>>& audio,
                                            const BaselineFusionParams& p, Rng& rng, bool training) {
  FeatureBatch x{row_from(visual), Matrix::Zero(1, p.audio_dim())};
  if (audio) x.audio = row_from(*audio);
  return to_std(baseline_forward(x, p, rng, training).logits);
}

struct BaselineBackward : FusionBackward {
  BaselineFusionParams grad;
};

inline BaselineBackward baseline_backward(const BaselineFusionParams& p, const BaselineTrace& t, const Matrix& grad_logits) {
  BaselineBackward r;
  r.grad.kind = p.kind;
  r.grad.visual_dim = p.visual_dim;
  r.grad.dropout = p.dropout;
  Matrix grad_joint;
  if (p.kind == BaselineKind::ConcatLinear) {
    auto lin = linear_backward(t.joint, p.linear, grad_logits);
    r.grad.linear = std::move(lin.grad);
    grad_joint = std::move(lin.grad_input);
  } else {
    auto head = linear_backward(t.dropped, p.head, grad_logits);
    r.grad.head = std::move(head.grad);
    auto ln = layer_norm_backward(t.ln, p.ln, dropout_backward(t.drop_mask, head.grad_input));
    r.grad.ln = std::move(ln.grad);
    auto fc1 = linear_backward(t.joint, p.fc1, gelu_backward(t.pre, ln.grad_input));
    r.grad.fc1 = std::move(fc1.grad);
    grad_joint = std::move(fc1.grad_input);
  }
  r.grad_visual = grad_joint.leftCols(p.visual_dim);
  r.grad_audio = grad_joint.rightCols(grad_joint.cols() - p.visual_dim);
  return r;
}

struct BaselineModel {
  using Params = BaselineFusionParams;
  using Trace = BaselineTrace;

  static Trace forward(const Params& p, const FeatureBatch& x, Rng& rng, bool training) {
    return baseline_forward(x, p, rng, training);
  }
  static const Matrix& logits(const Trace& t) { return t.logits; }
  static Params backward(const Params& p, const Trace& t, const Matrix& grad_logits) {
    return baseline_backward(p, t, grad_logits).grad;
  }
};

inline std::size_t fusion_param_count(const GatedFusionParams& p) { return count_parameters(p); }
inline std::size_t fusion_param_count(const BaselineFusionParams& p) { return count_parameters(p); }

}  // namespace avexpr
