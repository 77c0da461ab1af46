// SPDX-License-Identifier: Apache-2.0
#include "cirnn/gradcheck.hpp"

#include <algorithm>

#include "cirnn/rng.hpp"

namespace cirnn {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& v : m.span()) v = rng.uniform(lo, hi);
  return m;
}

template <typename P>
GradCheckResult finish(ModelKind kind, const GradCheckCase& c, const P& analytic, const P& numeric) {
  GradCheckResult res;
  res.kind = kind;
  res.shape = c;
  res.groups = compare_gradients(analytic, numeric);
  for (const GroupError& g : res.groups) res.max_error = std::max(res.max_error, g.max_error);
  return res;
}

}  // namespace

std::vector<GradCheckCase> gradcheck_cases(std::size_t count, std::uint64_t seed,
                                           std::optional<std::size_t> fixed_steps) {
  Rng rng(seed);
  std::vector<GradCheckCase> cases(count);
  for (GradCheckCase& c : cases) {
    c.n_x = 2 + static_cast<std::size_t>(rng.below(5));
    c.n_z = 1 + static_cast<std::size_t>(rng.below(3));
    c.n_h = 3 + static_cast<std::size_t>(rng.below(6));
    c.steps = fixed_steps ? *fixed_steps : 1 + static_cast<std::size_t>(rng.below(8));
    c.seed = rng.next_u64();
  }
  return cases;
}

GradCheckResult run_gradcheck(ModelKind kind, const GradCheckCase& c, double eps, LossScope scope) {
  Rng rng(c.seed);
  const Matrix xs = random_matrix(c.steps, c.n_x, rng, -1.0, 1.0);
  const Matrix zs = random_matrix(c.steps, c.n_z, rng, -1.0, 1.0);
  // Targets away from the initial predictions keep the gradients well above
  // the finite-difference noise.
  std::vector<Vector> ys;
  for (std::size_t t = 0; t < c.steps; ++t) ys.push_back(Vector{rng.uniform(1.0, 2.0)});
  const bool all = scope == LossScope::all_steps;

  if (kind == ModelKind::cirnn) {
    CiRnnParams p = init_cirnn(c.n_x, build_spec(BasisKind::polynomial, 2, c.n_z), c.n_h, 1, rng);
    p.b_y[0] = rng.uniform(-0.5, 0.5);
    const ForwardResult fwd = forward_sequence(p, xs, zs);
    const CiRnnGradients analytic = all ? backward(p, fwd.trace, std::span<const Vector>(ys))
                                        : backward(p, fwd.trace, ys.back());
    const CiRnnGradients numeric = all ? fd_gradient(p, xs, zs, std::span<const Vector>(ys), eps)
                                       : fd_gradient(p, xs, zs, ys.back(), eps);
    return finish(kind, c, analytic, numeric);
  }
  GruParams p = init_gru(c.n_x, c.n_h, 1, rng);
  p.b_y[0] = rng.uniform(-0.5, 0.5);
  const ForwardResult fwd = forward_sequence(p, xs);
  const GruGradients analytic = all ? backward_gru(p, fwd.trace, std::span<const Vector>(ys))
                                    : backward_gru(p, fwd.trace, ys.back());
  const GruGradients numeric = all ? fd_gradient(p, xs, std::span<const Vector>(ys), eps)
                                   : fd_gradient(p, xs, ys.back(), eps);
  return finish(kind, c, analytic, numeric);
}

}  // namespace cirnn
