// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>

#include "cirnn/cells.hpp"

namespace cirnn {

/// Which timesteps contribute to the L2 loss. The default follows the
/// many-to-one setup (one target at the window's last step); all_steps sums
/// one half squared error per step.
enum class LossScope { final_step, all_steps };

std::string to_string(LossScope scope);
LossScope parse_loss_scope(const std::string& name);

/// 1/2 * sum_i (y_i - y_hat_i)^2
double loss(std::span<const double> y_hat, std::span<const double> y);

/// Gradient of the final-step loss by reverse accumulation through the trace.
CiRnnGradients backward(const CiRnnParams& p, const Trace& trace, const Vector& y);
/// Gradient of sum_t loss(y_hat_t, ys[t]); ys has one target per step.
CiRnnGradients backward(const CiRnnParams& p, const Trace& trace, std::span<const Vector> ys);

GruGradients backward_gru(const GruParams& p, const Trace& trace, const Vector& y);
GruGradients backward_gru(const GruParams& p, const Trace& trace, std::span<const Vector> ys);

/// Loss of one sequence under the given parameters.
double sequence_loss(const CiRnnParams& p, const Matrix& xs, const Matrix& zs, const Vector& y);
double sequence_loss(const GruParams& p, const Matrix& xs, const Vector& y);
double sequence_loss(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                     std::span<const Vector> ys);
double sequence_loss(const GruParams& p, const Matrix& xs, std::span<const Vector> ys);

/// Central differences (L(θ+ε) - L(θ-ε)) / 2ε for every scalar parameter.
/// Throws ConfigError unless eps > 0.
CiRnnGradients fd_gradient(const CiRnnParams& p, const Matrix& xs, const Matrix& zs, const Vector& y,
                           double eps);
GruGradients fd_gradient(const GruParams& p, const Matrix& xs, const Vector& y, double eps);
CiRnnGradients fd_gradient(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                           std::span<const Vector> ys, double eps);
GruGradients fd_gradient(const GruParams& p, const Matrix& xs, std::span<const Vector> ys,
                         double eps);

/// Per-entry discrepancy used by gradient checks: relative error
/// |a - b| / max(|a|, |b|) when max(|a|, |b|) > 1e-8, else the absolute
/// error |a - b|.
double gradient_entry_error(double analytic, double numeric) noexcept;

struct GroupError {
  std::string name;
  double max_error = 0.0;
  double max_abs_error = 0.0;
};

std::array<GroupError, kParamGroups> compare_gradients(const GruGradients& analytic,
                                                       const GruGradients& numeric);
std::array<GroupError, kParamGroups> compare_gradients(const CiRnnGradients& analytic,
                                                       const CiRnnGradients& numeric);

/// acc += alpha * g, group by group.
void accumulate(GruGradients& acc, const GruGradients& g, double alpha = 1.0);
void accumulate(CiRnnGradients& acc, const CiRnnGradients& g, double alpha = 1.0);
void scale(GruGradients& g, double alpha);
void scale(CiRnnGradients& g, double alpha);
double global_norm(const GruGradients& g);
double global_norm(const CiRnnGradients& g);

}  // namespace cirnn
