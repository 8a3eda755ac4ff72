#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"

namespace daimon::numerics {

/// Floor added to the norm denominator while training, so gradients stay
/// finite even if the pre-normalization output collapses.
inline constexpr double kNormFloor = 1e-12;

struct MlpShape {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;

  bool operator==(const MlpShape&) const = default;
};

/// Two affine layers with one ReLU in between; the output head normalizes to
/// unit length. Matrices are row-major: w1 is [hidden x in], w2 [out x hidden].
struct MlpParams {
  std::size_t in = 0, hidden = 0, out = 0;
  std::vector<double> w1, b1, w2, b2;

  MlpShape shape() const { return {in, hidden, out}; }

  static MlpParams zeros(MlpShape s) {
    MlpParams p;
    p.in = s.in;
    p.hidden = s.hidden;
    p.out = s.out;
    p.w1.assign(s.hidden * s.in, 0.0);
    p.b1.assign(s.hidden, 0.0);
    p.w2.assign(s.out * s.hidden, 0.0);
    p.b2.assign(s.out, 0.0);
    return p;
  }

  /// Uniform init in [-sqrt(1/fan_in), +sqrt(1/fan_in)].
  static MlpParams random(MlpShape s, Rng& rng) {
    MlpParams p = zeros(s);
    double r1 = std::sqrt(1.0 / static_cast<double>(s.in));
    double r2 = std::sqrt(1.0 / static_cast<double>(s.hidden));
    for (auto& v : p.w1) v = rng.uniform(-r1, r1);
    for (auto& v : p.b1) v = rng.uniform(-r1, r1);
    for (auto& v : p.w2) v = rng.uniform(-r2, r2);
    for (auto& v : p.b2) v = rng.uniform(-r2, r2);
    return p;
  }

  std::size_t count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  double& flat(std::size_t i) {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    i -= w2.size();
    return b2[i];
  }

  bool same_shape(const MlpParams& o) const {
    return in == o.in && hidden == o.hidden && out == o.out;
  }

  bool all_finite() const {
    for (const auto* vec : {&w1, &b1, &w2, &b2})
      for (double v : *vec)
        if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Gradients are shaped exactly like the parameters they refer to.
using MlpGrads = MlpParams;

/// Intermediate activations of one forward pass, kept for backprop.
struct MlpTrace {
  std::vector<double> hidden_pre;   // w1 x + b1
  std::vector<double> hidden_act;   // relu of the above
  std::vector<double> out_pre;      // w2 h + b2
  double pre_norm = 0.0;            // ||out_pre||
  std::vector<double> y;            // out_pre / max(pre_norm, floor)
};

namespace detail {

inline void check_input(const MlpParams& p, std::span<const double> x) {
  if (x.size() != p.in)
    throw ContractViolation("mlp: input length " + std::to_string(x.size()) +
                            " does not match in-dimension " + std::to_string(p.in));
}

inline MlpTrace forward_trace(const MlpParams& p, std::span<const double> x, bool relaxed) {
  check_input(p, x);
  MlpTrace t;
  t.hidden_pre.resize(p.hidden);
  t.hidden_act.resize(p.hidden);
  for (std::size_t j = 0; j < p.hidden; ++j) {
    const double* row = &p.w1[j * p.in];
    double acc = p.b1[j];
    for (std::size_t i = 0; i < p.in; ++i) acc += row[i] * x[i];
    t.hidden_pre[j] = acc;
    t.hidden_act[j] = acc > 0.0 ? acc : 0.0;
  }
  t.out_pre.resize(p.out);
  double norm2 = 0.0;
  for (std::size_t k = 0; k < p.out; ++k) {
    const double* row = &p.w2[k * p.hidden];
    double acc = p.b2[k];
    for (std::size_t j = 0; j < p.hidden; ++j) acc += row[j] * t.hidden_act[j];
    t.out_pre[k] = acc;
    norm2 += acc * acc;
  }
  t.pre_norm = std::sqrt(norm2);
  if (!relaxed && t.pre_norm < kNormFloor)
    throw DegenerateOutput("mlp_forward: pre-normalization output has vanishing norm");
  double denom = relaxed ? t.pre_norm + kNormFloor : t.pre_norm;
  t.y.resize(p.out);
  for (std::size_t k = 0; k < p.out; ++k) t.y[k] = t.out_pre[k] / denom;
  return t;
}

}  // namespace detail

/// Unit-norm inference output: normalize(w2 relu(w1 x + b1) + b2).
inline std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> x) {
  return detail::forward_trace(p, x, /*relaxed=*/false).y;
}

/// Training-mode forward: keeps activations, floors the norm denominator.
inline MlpTrace mlp_forward_train(const MlpParams& p, std::span<const double> x) {
  return detail::forward_trace(p, x, /*relaxed=*/true);
}

/// Backprop of a scalar loss through one traced forward pass. `loss_tail` is
/// dL/dy (y the normalized output); gradients are accumulated into `grads`.
inline void mlp_backward_into(const MlpParams& p, std::span<const double> x,
                              const MlpTrace& t, std::span<const double> loss_tail,
                              MlpGrads& grads) {
  detail::check_input(p, x);
  if (loss_tail.size() != p.out)
    throw ContractViolation("mlp_backward: loss_tail length mismatch");
  if (!grads.same_shape(p)) throw ContractViolation("mlp_backward: grads shape mismatch");

  // Through y = z / denom: dL/dz = (g - (g.y) y) / denom.
  double denom = t.pre_norm + kNormFloor;
  double gy_dot_y = 0.0;
  for (std::size_t k = 0; k < p.out; ++k) gy_dot_y += loss_tail[k] * t.y[k];
  std::vector<double> gz(p.out);
  for (std::size_t k = 0; k < p.out; ++k)
    gz[k] = (loss_tail[k] - gy_dot_y * t.y[k]) / denom;

  for (std::size_t k = 0; k < p.out; ++k) {
    double g = gz[k];
    grads.b2[k] += g;
    double* grow = &grads.w2[k * p.hidden];
    for (std::size_t j = 0; j < p.hidden; ++j) grow[j] += g * t.hidden_act[j];
  }

  std::vector<double> gh(p.hidden, 0.0);
  for (std::size_t k = 0; k < p.out; ++k) {
    const double* row = &p.w2[k * p.hidden];
    double g = gz[k];
    for (std::size_t j = 0; j < p.hidden; ++j) gh[j] += g * row[j];
  }

  for (std::size_t j = 0; j < p.hidden; ++j) {
    if (t.hidden_pre[j] <= 0.0) continue;  // ReLU gate
    double g = gh[j];
    grads.b1[j] += g;
    double* grow = &grads.w1[j * p.in];
    for (std::size_t i = 0; i < p.in; ++i) grow[i] += g * x[i];
  }
}

/// dLoss/dparams for one input, given dLoss/dy. Recomputes the forward pass.
inline MlpGrads mlp_gradient(const MlpParams& p, std::span<const double> x,
                             std::span<const double> loss_tail) {
  MlpGrads grads = MlpParams::zeros(p.shape());
  MlpTrace t = mlp_forward_train(p, x);
  mlp_backward_into(p, x, t, loss_tail, grads);
  return grads;
}

struct AdamState {
  MlpParams m, v;  // moment accumulators, shaped like the parameters
  std::uint64_t step = 0;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState init(MlpShape shape, double lr = 1e-3, double beta1 = 0.9,
                        double beta2 = 0.999, double eps = 1e-8) {
    AdamState s;
    s.m = MlpParams::zeros(shape);
    s.v = MlpParams::zeros(shape);
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    return s;
  }
};

/// One Adam update with bias correction. `lr_scale` multiplies the base
/// learning rate (used for decay schedules).
inline void adam_step(MlpParams& p, const MlpGrads& g, AdamState& s, double lr_scale = 1.0) {
  if (!g.same_shape(p) || !s.m.same_shape(p))
    throw ContractViolation("adam_step: shape mismatch");
  if (!g.all_finite()) throw OptimizerError("adam_step: non-finite gradient");
  s.step += 1;
  double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  double lr = s.lr * lr_scale;
  auto update = [&](std::vector<double>& pv, const std::vector<double>& gv,
                    std::vector<double>& mv, std::vector<double>& vv) {
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = s.beta1 * mv[i] + (1.0 - s.beta1) * gv[i];
      vv[i] = s.beta2 * vv[i] + (1.0 - s.beta2) * gv[i] * gv[i];
      double mhat = mv[i] / bc1;
      double vhat = vv[i] / bc2;
      pv[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  };
  update(p.w1, g.w1, s.m.w1, s.v.w1);
  update(p.b1, g.b1, s.m.b1, s.v.b1);
  update(p.w2, g.w2, s.m.w2, s.v.w2);
  update(p.b2, g.b2, s.m.b2, s.v.b2);
}

}  // namespace daimon::numerics
