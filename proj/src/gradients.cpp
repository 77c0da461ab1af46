// SPDX-License-Identifier: Apache-2.0
#include "cirnn/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "cirnn/basis.hpp"
#include "cirnn/error.hpp"
#include "cirnn/linalg.hpp"

namespace cirnn {
namespace {

struct GateGrads {
  Matrix& in_s;
  Matrix& in_h;
  Matrix& in_r;
  Matrix& Us;
  Matrix& Uh;
  Matrix& Ur;
  Matrix& V;
  Vector& b_y;
};

// Reverse accumulation through the trace. dy[t] is dL/dy_hat_t, or empty
// when step t carries no loss.
void backward_core(const Matrix& Us, const Matrix& Uh, const Matrix& Ur, const Matrix& V,
                   const Trace& trace, const std::vector<Vector>& dy, GateGrads g) {
  const std::size_t n_h = Us.rows();
  Vector dh(n_h);
  Vector d_cand(n_h), d_s(n_h), d_r(n_h), dh_prev(n_h);

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const StepRecord& rec = trace.steps[t];
    if (!dy[t].empty()) {
      add_outer(g.V, dy[t], rec.h);
      axpy(1.0, dy[t], g.b_y.span());
      axpy(1.0, matvec_transposed(V, dy[t]), dh.span());
    }

    for (std::size_t k = 0; k < n_h; ++k) {
      const double s = rec.s[k], c = rec.cand[k];
      d_cand[k] = dh[k] * (1.0 - s) * (1.0 - c * c);
      d_s[k] = dh[k] * (rec.h_prev[k] - c) * s * (1.0 - s);
      dh_prev[k] = dh[k] * s;
    }

    const Vector gated = hadamard(rec.r, rec.h_prev);
    add_outer(g.in_h, d_cand, rec.input);
    add_outer(g.Uh, d_cand, gated);
    const Vector d_gated = matvec_transposed(Uh, d_cand);
    for (std::size_t k = 0; k < n_h; ++k) {
      const double r = rec.r[k];
      d_r[k] = d_gated[k] * rec.h_prev[k] * r * (1.0 - r);
      dh_prev[k] += d_gated[k] * r;
    }

    add_outer(g.in_s, d_s, rec.input);
    add_outer(g.Us, d_s, rec.h_prev);
    axpy(1.0, matvec_transposed(Us, d_s), dh_prev.span());

    add_outer(g.in_r, d_r, rec.input);
    add_outer(g.Ur, d_r, rec.h_prev);
    axpy(1.0, matvec_transposed(Ur, d_r), dh_prev.span());

    dh = dh_prev;
  }
}

std::vector<Vector> final_step_residual(const Trace& trace, const Vector& y) {
  if (trace.steps.empty()) throw ShapeError("backward: empty trace");
  const Vector& y_hat = trace.steps.back().y_hat;
  if (y.size() != y_hat.size()) {
    throw ShapeError("backward: target length " + std::to_string(y.size()) + " vs output length " +
                     std::to_string(y_hat.size()));
  }
  std::vector<Vector> dy(trace.steps.size());
  dy.back() = sub(y_hat, y);  // f'(u) = 1 for the identity output
  return dy;
}

std::vector<Vector> per_step_residuals(const Trace& trace, std::span<const Vector> ys) {
  if (trace.steps.empty()) throw ShapeError("backward: empty trace");
  if (ys.size() != trace.steps.size()) {
    throw ShapeError("backward: " + std::to_string(ys.size()) + " targets for " +
                     std::to_string(trace.steps.size()) + " steps");
  }
  std::vector<Vector> dy(trace.steps.size());
  for (std::size_t t = 0; t < dy.size(); ++t) {
    if (ys[t].size() != trace.steps[t].y_hat.size()) throw ShapeError("backward: target length mismatch");
    dy[t] = sub(trace.steps[t].y_hat, ys[t]);
  }
  return dy;
}

void check_trace(const Trace& trace, std::size_t input_len, std::size_t n_h) {
  for (const StepRecord& rec : trace.steps) {
    if (rec.input.size() != input_len || rec.h.size() != n_h || rec.h_prev.size() != n_h) {
      throw ShapeError("backward: trace does not match the parameters");
    }
  }
}

CiRnnGradients cirnn_backward(const CiRnnParams& p, const Trace& trace, const std::vector<Vector>& dy) {
  check_trace(trace, p.As.cols(), p.n_h());
  CiRnnGradients g = zeros_like(p);
  backward_core(p.Us, p.Uh, p.Ur, p.V, trace, dy, {g.As, g.Ah, g.Ar, g.Us, g.Uh, g.Ur, g.V, g.b_y});
  return g;
}

GruGradients gru_backward(const GruParams& p, const Trace& trace, const std::vector<Vector>& dy) {
  check_trace(trace, p.n_x(), p.n_h());
  GruGradients g = zeros_like(p);
  backward_core(p.Us, p.Uh, p.Ur, p.V, trace, dy, {g.Ws, g.Wh, g.Wr, g.Us, g.Uh, g.Ur, g.V, g.b_y});
  return g;
}

double steps_loss(const Trace& trace, std::span<const Vector> ys) {
  if (ys.size() != trace.steps.size()) throw ShapeError("sequence_loss: one target per step required");
  double total = 0.0;
  for (std::size_t t = 0; t < ys.size(); ++t) total += loss(trace.steps[t].y_hat, ys[t]);
  return total;
}

// Loss recomputed in long double for the finite-difference oracle. The
// central difference subtracts two nearly equal losses, so double rounding in
// the forward pass (about 1e-11 after dividing by 2 eps) would swamp small
// gradient entries. Gate inputs do not depend on the parameters and stay in
// double.
using Wide = long double;

Wide wide_loss(const Matrix& in_s, const Matrix& in_h, const Matrix& in_r, const Matrix& Us, const Matrix& Uh,
               const Matrix& Ur, const Matrix& V, const Vector& b_y, const std::vector<Vector>& inputs,
               std::span<const Vector> ys, bool every_step) {
  const std::size_t n_h = Us.rows();
  const std::size_t n_y = V.rows();
  if (ys.size() != (every_step ? inputs.size() : 1)) {
    throw ShapeError("sequence_loss: one target per step required");
  }
  for (const Vector& u : inputs) {
    if (u.size() != in_s.cols()) {
      throw ShapeError("sequence_loss: input width " + std::to_string(u.size()) + " vs expected " +
                       std::to_string(in_s.cols()));
    }
  }
  auto row_dot = [](const Matrix& m, std::size_t r, const auto& v) {
    Wide acc = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += static_cast<Wide>(m(r, c)) * static_cast<Wide>(v[c]);
    return acc;
  };
  auto sigm = [](Wide a) { return Wide{1} / (Wide{1} + std::exp(-a)); };
  std::vector<Wide> h(n_h, 0), s(n_h), gated(n_h), next(n_h);
  Wide total = 0;
  auto add_loss = [&](const Vector& y) {
    if (y.size() != n_y) throw ShapeError("sequence_loss: target length mismatch");
    for (std::size_t i = 0; i < n_y; ++i) {
      const Wide d = static_cast<Wide>(y[i]) - (row_dot(V, i, h) + static_cast<Wide>(b_y[i]));
      total += d * d / 2;
    }
  };
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Vector& u = inputs[t];
    for (std::size_t k = 0; k < n_h; ++k) {
      s[k] = sigm(row_dot(in_s, k, u) + row_dot(Us, k, h));
      gated[k] = sigm(row_dot(in_r, k, u) + row_dot(Ur, k, h)) * h[k];
    }
    for (std::size_t k = 0; k < n_h; ++k) {
      const Wide cand = std::tanh(row_dot(in_h, k, u) + row_dot(Uh, k, gated));
      next[k] = s[k] * h[k] + (1 - s[k]) * cand;
    }
    h.swap(next);
    if (every_step) add_loss(ys[t]);
  }
  if (!every_step) add_loss(ys[0]);
  return total;
}

std::vector<Vector> gate_inputs(const CiRnnParams& p, const Matrix& xs, const Matrix& zs) {
  if (xs.rows() != zs.rows()) throw ShapeError("sequence_loss: xs and zs differ in length");
  std::vector<Vector> out;
  for (std::size_t t = 0; t < xs.rows(); ++t) {
    out.push_back(kron(xs.row(t), eval(p.basis, zs.row(t))));
  }
  return out;
}

std::vector<Vector> gate_inputs(const Matrix& xs) {
  std::vector<Vector> out;
  for (std::size_t t = 0; t < xs.rows(); ++t) out.emplace_back(xs.row(t));
  return out;
}

Wide wide_loss(const CiRnnParams& p, const std::vector<Vector>& u, std::span<const Vector> ys, bool every) {
  return wide_loss(p.As, p.Ah, p.Ar, p.Us, p.Uh, p.Ur, p.V, p.b_y, u, ys, every);
}

Wide wide_loss(const GruParams& p, const std::vector<Vector>& u, std::span<const Vector> ys, bool every) {
  return wide_loss(p.Ws, p.Wh, p.Wr, p.Us, p.Uh, p.Ur, p.V, p.b_y, u, ys, every);
}

template <typename P, typename LossFn>
P central_differences(const P& p, double eps, LossFn&& loss_of) {
  if (!(eps > 0.0)) throw ConfigError("fd_gradient: eps must be positive");
  P work = p;
  P grad = zeros_like(p);
  auto work_groups = param_groups(work);
  auto grad_groups = param_groups(grad);
  for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
    auto values = work_groups[gi].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const Wide plus = loss_of(work);
      values[i] = saved - eps;
      const Wide minus = loss_of(work);
      values[i] = saved;
      // The actual step is (saved + eps) - (saved - eps) as stored in double.
      const Wide step = static_cast<Wide>(saved + eps) - static_cast<Wide>(saved - eps);
      grad_groups[gi].values[i] = static_cast<double>((plus - minus) / step);
    }
  }
  return grad;
}

template <typename P>
std::array<GroupError, kParamGroups> compare_impl(const P& analytic, const P& numeric) {
  const auto a = param_groups(analytic);
  const auto n = param_groups(numeric);
  std::array<GroupError, kParamGroups> out;
  for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
    if (a[gi].values.size() != n[gi].values.size()) throw ShapeError("compare_gradients: shape mismatch");
    out[gi].name = std::string(a[gi].name);
    for (std::size_t i = 0; i < a[gi].values.size(); ++i) {
      const double av = a[gi].values[i], nv = n[gi].values[i];
      out[gi].max_error = std::max(out[gi].max_error, gradient_entry_error(av, nv));
      out[gi].max_abs_error = std::max(out[gi].max_abs_error, std::abs(av - nv));
    }
  }
  return out;
}

template <typename P>
void accumulate_impl(P& acc, const P& g, double alpha) {
  auto dst = param_groups(acc);
  const auto src = param_groups(g);
  for (std::size_t gi = 0; gi < kParamGroups; ++gi) {
    if (dst[gi].values.size() != src[gi].values.size()) throw ShapeError("accumulate: shape mismatch");
    axpy(alpha, src[gi].values, dst[gi].values);
  }
}

template <typename P>
void scale_impl(P& g, double alpha) {
  for (auto& group : param_groups(g)) {
    for (double& v : group.values) v *= alpha;
  }
}

template <typename P>
double norm_impl(const P& g) {
  double acc = 0.0;
  for (const auto& group : param_groups(g)) acc += sum_squares(group.values);
  return std::sqrt(acc);
}

}  // namespace

std::string to_string(LossScope scope) {
  return scope == LossScope::final_step ? "final_step" : "all_steps";
}

LossScope parse_loss_scope(const std::string& name) {
  if (name == "final_step" || name == "final") return LossScope::final_step;
  if (name == "all_steps" || name == "all") return LossScope::all_steps;
  throw ConfigError("unknown loss scope '" + name + "' (allowed: final_step, all_steps)");
}

double loss(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) {
    throw ShapeError("loss: prediction length " + std::to_string(y_hat.size()) + " vs target length " +
                     std::to_string(y.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - y_hat[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

CiRnnGradients backward(const CiRnnParams& p, const Trace& trace, const Vector& y) {
  return cirnn_backward(p, trace, final_step_residual(trace, y));
}

CiRnnGradients backward(const CiRnnParams& p, const Trace& trace, std::span<const Vector> ys) {
  return cirnn_backward(p, trace, per_step_residuals(trace, ys));
}

GruGradients backward_gru(const GruParams& p, const Trace& trace, const Vector& y) {
  return gru_backward(p, trace, final_step_residual(trace, y));
}

GruGradients backward_gru(const GruParams& p, const Trace& trace, std::span<const Vector> ys) {
  return gru_backward(p, trace, per_step_residuals(trace, ys));
}

double sequence_loss(const CiRnnParams& p, const Matrix& xs, const Matrix& zs, const Vector& y) {
  return loss(forward_sequence(p, xs, zs).y_hat, y);
}

double sequence_loss(const GruParams& p, const Matrix& xs, const Vector& y) {
  return loss(forward_sequence(p, xs).y_hat, y);
}

double sequence_loss(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                     std::span<const Vector> ys) {
  return steps_loss(forward_sequence(p, xs, zs).trace, ys);
}

double sequence_loss(const GruParams& p, const Matrix& xs, std::span<const Vector> ys) {
  return steps_loss(forward_sequence(p, xs).trace, ys);
}

CiRnnGradients fd_gradient(const CiRnnParams& p, const Matrix& xs, const Matrix& zs, const Vector& y,
                           double eps) {
  const auto u = gate_inputs(p, xs, zs);
  const std::span<const Vector> ys(&y, 1);
  return central_differences(p, eps, [&](const CiRnnParams& q) { return wide_loss(q, u, ys, false); });
}

GruGradients fd_gradient(const GruParams& p, const Matrix& xs, const Vector& y, double eps) {
  const auto u = gate_inputs(xs);
  const std::span<const Vector> ys(&y, 1);
  return central_differences(p, eps, [&](const GruParams& q) { return wide_loss(q, u, ys, false); });
}

CiRnnGradients fd_gradient(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                           std::span<const Vector> ys, double eps) {
  const auto u = gate_inputs(p, xs, zs);
  return central_differences(p, eps, [&](const CiRnnParams& q) { return wide_loss(q, u, ys, true); });
}

GruGradients fd_gradient(const GruParams& p, const Matrix& xs, std::span<const Vector> ys,
                         double eps) {
  const auto u = gate_inputs(xs);
  return central_differences(p, eps, [&](const GruParams& q) { return wide_loss(q, u, ys, true); });
}

double gradient_entry_error(double analytic, double numeric) noexcept {
  const double diff = std::abs(analytic - numeric);
  const double magnitude = std::max(std::abs(analytic), std::abs(numeric));
  return magnitude > 1e-8 ? diff / magnitude : diff;
}

std::array<GroupError, kParamGroups> compare_gradients(const GruGradients& analytic,
                                                       const GruGradients& numeric) {
  return compare_impl(analytic, numeric);
}

std::array<GroupError, kParamGroups> compare_gradients(const CiRnnGradients& analytic,
                                                       const CiRnnGradients& numeric) {
  return compare_impl(analytic, numeric);
}

void accumulate(GruGradients& acc, const GruGradients& g, double alpha) { accumulate_impl(acc, g, alpha); }
void accumulate(CiRnnGradients& acc, const CiRnnGradients& g, double alpha) {
  accumulate_impl(acc, g, alpha);
}
void scale(GruGradients& g, double alpha) { scale_impl(g, alpha); }
void scale(CiRnnGradients& g, double alpha) { scale_impl(g, alpha); }
double global_norm(const GruGradients& g) { return norm_impl(g); }
double global_norm(const CiRnnGradients& g) { return norm_impl(g); }

}  // namespace cirnn
