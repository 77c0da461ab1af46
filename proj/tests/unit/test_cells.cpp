// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "cirnn/cells.hpp"
#include "cirnn/error.hpp"
#include "doctest.h"
#include "reference.hpp"

using namespace cirnn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (double& v : m.span()) v = rng.uniform(lo, hi);
  return m;
}

GruParams zero_gru(std::size_t n_x, std::size_t n_h) {
  return GruParams{Matrix(n_h, n_x), Matrix(n_h, n_x), Matrix(n_h, n_x), Matrix(n_h, n_h),
                   Matrix(n_h, n_h), Matrix(n_h, n_h), Matrix(1, n_h),   Vector(1)};
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

}  // namespace

TEST_CASE("gru step fixed points") {
  const GruParams zero = zero_gru(3, 4);
  const StepRecord rec = gru_step(zero, std::vector<double>{1, -2, 3}, std::vector<double>(4, 0.0));
  CHECK(rec.h == Vector(4));
  CHECK(rec.s == Vector{0.5, 0.5, 0.5, 0.5});

  // A large positive update-gate drive keeps the previous state.
  GruParams sat = zero;
  for (double& v : sat.Ws.span()) v = 1e3;
  Rng rng(1);
  sat.Wh = random_matrix(4, 3, rng);
  const Vector h_prev{0.3, -0.2, 0.9, -0.7};
  const StepRecord kept = gru_step(sat, std::vector<double>{1, 1, 1}, h_prev);
  CHECK(max_abs_diff(kept.h, h_prev) < 1e-6);

  ForwardResult run = forward_sequence(sat, Matrix(6, 3, 1.0), h_prev);
  for (const StepRecord& step : run.trace.steps) CHECK(max_abs_diff(step.h, h_prev) < 1e-6);
}

TEST_CASE("gru forward equals the scalar-loop oracle exactly") {
  Rng rng(17);
  const GruParams p = init_gru(4, 6, 2, rng);
  const Matrix xs = random_matrix(7, 4, rng);
  const ForwardResult fwd = forward_sequence(p, xs);
  const auto run = ref::forward(ref::net_of<double>(p), ref::grid_of(xs), {}, 2);
  for (std::size_t t = 0; t < 7; ++t) {
    CHECK(fwd.trace.steps[t].h.values() == run.h[t]);
    CHECK(fwd.trace.steps[t].y_hat.values() == run.y_hat[t]);
  }
}

TEST_CASE("output layer") {
  GruParams p = zero_gru(1, 2);
  p.b_y = Vector{5.0};
  CHECK(output(p, std::vector<double>{0.4, -0.1}) == Vector{5.0});
  p.V = Matrix{{1, 1}};
  p.b_y = Vector{0.0};
  CHECK(output(p, std::vector<double>{0.2, 0.3})[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("cirnn with a zero context has no input pathway") {
  Rng rng(2);
  CiRnnParams p = init_cirnn(3, build_spec(BasisKind::polynomial, 2, 2), 5, 1, rng);
  for (Matrix* m : {&p.Us, &p.Uh, &p.Ur}) *m = Matrix(5, 5);
  const StepRecord rec = cirnn_step(p, std::vector<double>{4, -1, 2}, std::vector<double>{0, 0}, Vector(5));
  CHECK(rec.h == Vector(5));
}

TEST_CASE("cirnn with a linear one-variable basis is a scaled gru") {
  Rng rng(3);
  const CiRnnParams p = init_cirnn(3, build_spec(BasisKind::polynomial, 1, 1), 4, 1, rng);
  const double c = 0.5;  // a power of two keeps the scaling exact
  GruParams g{p.As, p.Ah, p.Ar, p.Us, p.Uh, p.Ur, p.V, p.b_y};
  for (Matrix* m : {&g.Ws, &g.Wh, &g.Wr})
    for (double& v : m->span()) v *= c;
  const Vector x{0.3, -0.8, 0.1};
  const Vector h{0.2, 0.1, -0.4, 0.6};
  const StepRecord a = cirnn_step(p, x, std::vector<double>{c}, h);
  const StepRecord b = gru_step(g, x, h);
  CHECK(a.h == b.h);
}

TEST_CASE("kronecker form equals the elementwise-weight form") {
  Rng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n_x = 2 + rng.below(5), n_z = 1 + rng.below(3), n_h = 3 + rng.below(6), T = 1 + rng.below(8);
    const CiRnnParams p = init_cirnn(n_x, build_spec(BasisKind::polynomial, 2, n_z), n_h, 1, rng);
    const Matrix xs = random_matrix(T, n_x, rng);
    const Matrix zs = random_matrix(T, n_z, rng);
    const ForwardResult fwd = forward_sequence(p, xs, zs);
    const auto run = ref::forward(ref::net_of<double>(p), ref::grid_of(xs), ref::grid_of(zs), 2);
    for (std::size_t t = 0; t < T; ++t) {
      worst = std::max(worst, max_abs_diff(fwd.trace.steps[t].h, run.h[t]));
      worst = std::max(worst, max_abs_diff(fwd.trace.steps[t].y_hat, run.y_hat[t]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("constant context reduces a cirnn to an explicit gru") {
  Rng rng(5);
  const std::size_t n_x = 4, n_z = 3, n_h = 8, T = 100;
  const CiRnnParams p = init_cirnn(n_x, build_spec(BasisKind::polynomial, 2, n_z), n_h, 1, rng);
  const std::vector<double> z{0.4, -0.7, 0.9};

  // W(z) built entry by entry from the coefficient rows.
  const auto g = ref::basis(z, 2);
  auto collapse = [&](const Matrix& a) {
    Matrix w(n_h, n_x);
    for (std::size_t k = 0; k < n_h; ++k)
      for (std::size_t i = 0; i < n_x; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) w(k, i) += a(k, i * g.size() + j) * g[j];
    return w;
  };
  const GruParams gru{collapse(p.As), collapse(p.Ah), collapse(p.Ar), p.Us, p.Uh, p.Ur, p.V, p.b_y};

  const Matrix xs = random_matrix(T, n_x, rng);
  Matrix zs(T, n_z);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < n_z; ++j) zs(t, j) = z[j];
  const ForwardResult a = forward_sequence(p, xs, zs);
  const ForwardResult b = forward_sequence(gru, xs);
  double worst = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    worst = std::max(worst, max_abs_diff(a.trace.steps[t].h, b.trace.steps[t].h));
    worst = std::max(worst, max_abs_diff(a.trace.steps[t].y_hat, b.trace.steps[t].y_hat));
  }
  CHECK(worst < 1e-12);

  const GruParams lib = gru_at_context(p, z);
  CHECK(max_abs_diff(lib.Ws.span(), gru.Ws.span()) < 1e-15);
}

TEST_CASE("forward_sequence is the composition of steps") {
  Rng rng(6);
  const CiRnnParams p = init_cirnn(3, build_spec(BasisKind::polynomial, 2, 2), 5, 1, rng);
  const Matrix xs = random_matrix(4, 3, rng);
  const Matrix zs = random_matrix(4, 2, rng);
  Vector h(5);
  for (std::size_t t = 0; t < 4; ++t) h = cirnn_step(p, xs.row(t), zs.row(t), h).h;
  const ForwardResult fwd = forward_sequence(p, xs, zs);
  CHECK(fwd.trace.steps.back().h == h);
  CHECK(fwd.y_hat == output(p, h));
  CHECK(predict(Model{p}, xs, &zs) == fwd.y_hat);

  const ForwardResult one = forward_sequence(p, Matrix(1, 3, 0.5), Matrix(1, 2, 0.25));
  CHECK(one.trace.steps.size() == 1);
  CHECK(one.y_hat == output(p, cirnn_step(p, Matrix(1, 3, 0.5).row(0), Matrix(1, 2, 0.25).row(0), Vector(5)).h));
}

TEST_CASE("shape errors") {
  Rng rng(7);
  const CiRnnParams p = init_cirnn(3, build_spec(BasisKind::polynomial, 2, 2), 4, 1, rng);
  CHECK_THROWS_AS(cirnn_step(p, std::vector<double>{1, 2}, std::vector<double>{0, 0}, Vector(4)), ShapeError);
  CHECK_THROWS_AS(cirnn_step(p, std::vector<double>{1, 2, 3}, std::vector<double>{0}, Vector(4)), ShapeError);
  CHECK_THROWS_AS(forward_sequence(p, Matrix(3, 3), Matrix(2, 2)), ShapeError);
  CiRnnParams bad = p;
  bad.Uh = Matrix(3, 4);
  CHECK_THROWS_AS(bad.validate(), ShapeError);
  CHECK_THROWS_AS(predict(Model{p}, Matrix(2, 3), nullptr), ShapeError);
}

TEST_CASE("initialization") {
  Rng rng(8);
  const CiRnnParams p = init_cirnn(6, build_spec(BasisKind::polynomial, 2, 3), 15, 1, rng);
  CHECK(p.As.rows() == 15);
  CHECK(p.As.cols() == 54);
  const double limit = std::sqrt(6.0 / (15 + 54));
  for (double v : p.As.span()) CHECK(std::abs(v) <= limit);
  CHECK(p.b_y == Vector{0.0});
  Rng again(8);
  CHECK(init_cirnn(6, build_spec(BasisKind::polynomial, 2, 3), 15, 1, again) == p);
}

TEST_CASE("feature blocks") {
  Rng rng(9);
  const Matrix a = random_matrix(15, 54, rng);
  const std::vector<Matrix> blocks = feature_blocks(a, 9);
  REQUIRE(blocks.size() == 6);
  for (const Matrix& b : blocks) {
    CHECK(b.rows() == 15);
    CHECK(b.cols() == 9);
  }
  CHECK(blocks[2](4, 7) == a(4, 2 * 9 + 7));
  CHECK(join_feature_blocks(blocks) == a);
  CHECK_THROWS_AS(feature_blocks(a, 8), ShapeError);
}

TEST_CASE("model kind names") {
  CHECK(parse_model_kind("cirnn") == ModelKind::cirnn);
  CHECK(parse_model_kind("gru") == ModelKind::gru);
  CHECK_THROWS_AS(parse_model_kind("lstm"), ConfigError);
}
