// SPDX-License-Identifier: Apache-2.0
#include "cirnn/cells.hpp"

#include <algorithm>
#include <cmath>

#include "cirnn/error.hpp"
#include "cirnn/linalg.hpp"

namespace cirnn {
namespace {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(name) + " is " + shape_string(m) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_len(std::span<const double> v, std::size_t len, const char* name) {
  if (v.size() != len) {
    throw ShapeError(std::string(name) + " has length " + std::to_string(v.size()) + ", expected " +
                     std::to_string(len));
  }
}

// Shared gate arithmetic; `in_*` multiply rec.input.
void gate_step(const Matrix& in_s, const Matrix& in_h, const Matrix& in_r, const Matrix& Us,
               const Matrix& Uh, const Matrix& Ur, StepRecord& rec) {
  const std::size_t n_h = Us.rows();
  const Vector pre_r = add(matvec(in_r, rec.input), matvec(Ur, rec.h_prev));
  const Vector pre_s = add(matvec(in_s, rec.input), matvec(Us, rec.h_prev));
  rec.r = sigmoid(pre_r);
  rec.s = sigmoid(pre_s);
  const Vector gated = hadamard(rec.r, rec.h_prev);
  rec.cand = tanh(add(matvec(in_h, rec.input), matvec(Uh, gated)));
  rec.h = Vector(n_h);
  for (std::size_t k = 0; k < n_h; ++k) {
    rec.h[k] = rec.s[k] * rec.h_prev[k] + (1.0 - rec.s[k]) * rec.cand[k];
  }
}

Vector linear_output(const Matrix& V, const Vector& b_y, std::span<const double> h) {
  require_len(h, V.cols(), "output: h");
  return add(matvec(V, h), b_y);
}

template <typename P>
void fill_output(const P& p, StepRecord& rec) {
  rec.u = linear_output(p.V, p.b_y, rec.h);
  rec.y_hat = rec.u;
}

Vector initial_state(const Vector& h0, std::size_t n_h) {
  if (h0.empty()) return Vector(n_h);
  require_len(h0, n_h, "h0");
  return h0;
}

void glorot(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (double& w : m.span()) w = rng.uniform(-limit, limit);
}

}  // namespace

void GruParams::validate() const {
  const std::size_t nx = n_x(), nh = n_h(), ny = n_y();
  if (nx == 0 || nh == 0 || ny == 0) throw ShapeError("GruParams: empty dimension");
  require_shape(Ws, nh, nx, "Ws");
  require_shape(Wh, nh, nx, "Wh");
  require_shape(Wr, nh, nx, "Wr");
  require_shape(Us, nh, nh, "Us");
  require_shape(Uh, nh, nh, "Uh");
  require_shape(Ur, nh, nh, "Ur");
  require_shape(V, ny, nh, "V");
  require_len(b_y, ny, "b_y");
}

void CiRnnParams::validate() const {
  const std::size_t nh = n_h(), ny = n_y();
  if (basis.m == 0 || basis.exponents.size() != basis.m) throw ShapeError("CiRnnParams: invalid basis");
  if (As.cols() % basis.m != 0 || As.cols() == 0) {
    throw ShapeError("As has " + std::to_string(As.cols()) + " columns, not a positive multiple of m = " +
                     std::to_string(basis.m));
  }
  if (nh == 0 || ny == 0) throw ShapeError("CiRnnParams: empty dimension");
  const std::size_t cols = n_x() * basis.m;
  require_shape(As, nh, cols, "As");
  require_shape(Ah, nh, cols, "Ah");
  require_shape(Ar, nh, cols, "Ar");
  require_shape(Us, nh, nh, "Us");
  require_shape(Uh, nh, nh, "Uh");
  require_shape(Ur, nh, nh, "Ur");
  require_shape(V, ny, nh, "V");
  require_len(b_y, ny, "b_y");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::gru ? "gru" : "cirnn"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gru" || name == "GRU") return ModelKind::gru;
  if (name == "cirnn" || name == "CiRNN") return ModelKind::cirnn;
  throw ConfigError("unknown model kind '" + name + "' (allowed: gru, cirnn)");
}

ModelKind kind_of(const Model& model) noexcept {
  return std::holds_alternative<GruParams>(model) ? ModelKind::gru : ModelKind::cirnn;
}

namespace {

template <typename T, typename M>
BasicParamGroup<T> group(std::string_view name, M& m) {
  return {name, m.span(), m.rows(), m.cols()};
}

template <typename T, typename P>
std::array<BasicParamGroup<T>, kParamGroups> gru_groups(P& p) {
  return {group<T>("Ws", p.Ws), group<T>("Wh", p.Wh), group<T>("Wr", p.Wr),
          group<T>("Us", p.Us), group<T>("Uh", p.Uh), group<T>("Ur", p.Ur),
          group<T>("V", p.V),   BasicParamGroup<T>{"b_y", p.b_y.span(), p.b_y.size(), 1}};
}

template <typename T, typename P>
std::array<BasicParamGroup<T>, kParamGroups> cirnn_groups(P& p) {
  return {group<T>("As", p.As), group<T>("Ah", p.Ah), group<T>("Ar", p.Ar),
          group<T>("Us", p.Us), group<T>("Uh", p.Uh), group<T>("Ur", p.Ur),
          group<T>("V", p.V),   BasicParamGroup<T>{"b_y", p.b_y.span(), p.b_y.size(), 1}};
}

}  // namespace

std::array<ParamGroup, kParamGroups> param_groups(GruParams& p) { return gru_groups<double>(p); }
std::array<ConstParamGroup, kParamGroups> param_groups(const GruParams& p) {
  return gru_groups<const double>(p);
}

std::array<ParamGroup, kParamGroups> param_groups(CiRnnParams& p) { return cirnn_groups<double>(p); }
std::array<ConstParamGroup, kParamGroups> param_groups(const CiRnnParams& p) {
  return cirnn_groups<const double>(p);
}

GruParams zeros_like(const GruParams& p) {
  GruParams z = p;
  for (auto& group : param_groups(z)) std::fill(group.values.begin(), group.values.end(), 0.0);
  return z;
}

CiRnnParams zeros_like(const CiRnnParams& p) {
  CiRnnParams z = p;
  for (auto& group : param_groups(z)) std::fill(group.values.begin(), group.values.end(), 0.0);
  return z;
}

GruParams init_gru(std::size_t n_x, std::size_t n_h, std::size_t n_y, Rng& rng) {
  GruParams p{Matrix(n_h, n_x), Matrix(n_h, n_x), Matrix(n_h, n_x), Matrix(n_h, n_h),
              Matrix(n_h, n_h), Matrix(n_h, n_h), Matrix(n_y, n_h), Vector(n_y)};
  for (Matrix* m : {&p.Ws, &p.Wh, &p.Wr, &p.Us, &p.Uh, &p.Ur, &p.V}) glorot(*m, rng);
  p.validate();
  return p;
}

CiRnnParams init_cirnn(std::size_t n_x, const BasisSpec& basis, std::size_t n_h, std::size_t n_y,
                       Rng& rng) {
  const std::size_t cols = n_x * basis.m;
  CiRnnParams p{Matrix(n_h, cols), Matrix(n_h, cols), Matrix(n_h, cols), Matrix(n_h, n_h),
                Matrix(n_h, n_h),  Matrix(n_h, n_h),  Matrix(n_y, n_h),  Vector(n_y),
                basis};
  for (Matrix* m : {&p.As, &p.Ah, &p.Ar, &p.Us, &p.Uh, &p.Ur, &p.V}) glorot(*m, rng);
  p.validate();
  return p;
}

StepRecord gru_step(const GruParams& p, std::span<const double> x, std::span<const double> h_prev) {
  require_len(x, p.n_x(), "gru_step: x");
  require_len(h_prev, p.n_h(), "gru_step: h_prev");
  StepRecord rec;
  rec.x = Vector(x);
  rec.input = rec.x;
  rec.h_prev = Vector(h_prev);
  gate_step(p.Ws, p.Wh, p.Wr, p.Us, p.Uh, p.Ur, rec);
  fill_output(p, rec);
  return rec;
}

StepRecord cirnn_step(const CiRnnParams& p, std::span<const double> x, std::span<const double> z,
                      std::span<const double> h_prev) {
  require_len(x, p.n_x(), "cirnn_step: x");
  require_len(z, p.n_z(), "cirnn_step: z");
  require_len(h_prev, p.n_h(), "cirnn_step: h_prev");
  StepRecord rec;
  rec.x = Vector(x);
  rec.z = Vector(z);
  rec.g = eval(p.basis, z);
  rec.input = kron(rec.x, rec.g);
  rec.h_prev = Vector(h_prev);
  gate_step(p.As, p.Ah, p.Ar, p.Us, p.Uh, p.Ur, rec);
  fill_output(p, rec);
  return rec;
}

Vector output(const GruParams& p, std::span<const double> h) { return linear_output(p.V, p.b_y, h); }
Vector output(const CiRnnParams& p, std::span<const double> h) { return linear_output(p.V, p.b_y, h); }

ForwardResult forward_sequence(const GruParams& p, const Matrix& xs, const Vector& h0) {
  if (xs.rows() == 0) throw ShapeError("forward_sequence: empty sequence");
  ForwardResult result;
  result.trace.steps.reserve(xs.rows());
  Vector h = initial_state(h0, p.n_h());
  for (std::size_t t = 0; t < xs.rows(); ++t) {
    result.trace.steps.push_back(gru_step(p, xs.row(t), h));
    h = result.trace.steps.back().h;
  }
  result.y_hat = result.trace.steps.back().y_hat;
  return result;
}

ForwardResult forward_sequence(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                               const Vector& h0) {
  if (xs.rows() == 0) throw ShapeError("forward_sequence: empty sequence");
  if (zs.rows() != xs.rows()) {
    throw ShapeError("forward_sequence: " + std::to_string(xs.rows()) + " primary steps but " +
                     std::to_string(zs.rows()) + " context steps");
  }
  ForwardResult result;
  result.trace.steps.reserve(xs.rows());
  Vector h = initial_state(h0, p.n_h());
  for (std::size_t t = 0; t < xs.rows(); ++t) {
    result.trace.steps.push_back(cirnn_step(p, xs.row(t), zs.row(t), h));
    h = result.trace.steps.back().h;
  }
  result.y_hat = result.trace.steps.back().y_hat;
  return result;
}

namespace {
Matrix stack_rows(std::span<const Vector> rows, const char* what) {
  if (rows.empty()) throw ShapeError(std::string("forward_sequence: empty ") + what);
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != cols) throw ShapeError(std::string("forward_sequence: ragged ") + what);
    std::copy(rows[t].begin(), rows[t].end(), m.row(t).begin());
  }
  return m;
}
}  // namespace

ForwardResult forward_sequence(const GruParams& p, std::span<const Vector> xs, const Vector& h0) {
  return forward_sequence(p, stack_rows(xs, "primary inputs"), h0);
}

ForwardResult forward_sequence(const CiRnnParams& p, std::span<const Vector> xs,
                               std::span<const Vector> zs, const Vector& h0) {
  if (xs.size() != zs.size()) {
    throw ShapeError("forward_sequence: " + std::to_string(xs.size()) + " primary steps but " +
                     std::to_string(zs.size()) + " context steps");
  }
  return forward_sequence(p, stack_rows(xs, "primary inputs"), stack_rows(zs, "context inputs"), h0);
}

ForwardResult forward_sequence(const Model& model, const Matrix& xs, const Matrix* zs) {
  if (const auto* gru = std::get_if<GruParams>(&model)) {
    if (zs != nullptr) throw ShapeError("forward_sequence: plain GRU takes no context inputs");
    return forward_sequence(*gru, xs);
  }
  if (zs == nullptr) throw ShapeError("forward_sequence: CiRNN requires context inputs");
  return forward_sequence(std::get<CiRnnParams>(model), xs, *zs);
}

Vector predict(const Model& model, const Matrix& xs, const Matrix* zs) {
  return forward_sequence(model, xs, zs).y_hat;
}

std::vector<Matrix> feature_blocks(const Matrix& a, std::size_t m) {
  if (m == 0 || a.cols() % m != 0) {
    throw ShapeError("feature_blocks: " + shape_string(a) + " does not split into blocks of " + std::to_string(m) +
                     " columns");
  }
  std::vector<Matrix> blocks(a.cols() / m, Matrix(a.rows(), m));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t k = 0; k < a.rows(); ++k) {
      for (std::size_t j = 0; j < m; ++j) blocks[i](k, j) = a(k, i * m + j);
    }
  }
  return blocks;
}

Matrix join_feature_blocks(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw ShapeError("join_feature_blocks: no blocks");
  const std::size_t rows = blocks[0].rows(), m = blocks[0].cols();
  Matrix a(rows, m * blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != rows || blocks[i].cols() != m) {
      throw ShapeError("join_feature_blocks: block " + std::to_string(i) + " is " + shape_string(blocks[i]) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(m));
    }
    for (std::size_t k = 0; k < rows; ++k) {
      for (std::size_t j = 0; j < m; ++j) a(k, i * m + j) = blocks[i](k, j);
    }
  }
  return a;
}

GruParams gru_at_context(const CiRnnParams& p, std::span<const double> z) {
  const Vector g = eval(p.basis, z);
  const std::size_t nx = p.n_x(), nh = p.n_h(), m = p.basis.m;
  auto collapse = [&](const Matrix& A) {
    Matrix W(nh, nx);
    for (std::size_t k = 0; k < nh; ++k) {
      for (std::size_t i = 0; i < nx; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < m; ++j) w += A(k, i * m + j) * g[j];
        W(k, i) = w;
      }
    }
    return W;
  };
  return GruParams{collapse(p.As), collapse(p.Ah), collapse(p.Ar), p.Us, p.Uh, p.Ur, p.V, p.b_y};
}

}  // namespace cirnn
