// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cirnn/basis.hpp"
#include "cirnn/rng.hpp"
#include "cirnn/tensor.hpp"

namespace cirnn {

/// Plain GRU: gates driven by fixed input weights W and recurrent weights U.
/// No gate biases; only the output layer carries a bias.
struct GruParams {
  Matrix Ws, Wh, Wr;  // n_h x n_x
  Matrix Us, Uh, Ur;  // n_h x n_h
  Matrix V;           // n_y x n_h
  Vector b_y;         // n_y

  std::size_t n_x() const noexcept { return Ws.cols(); }
  std::size_t n_h() const noexcept { return Us.rows(); }
  std::size_t n_y() const noexcept { return V.rows(); }

  /// Throws ShapeError if the shapes are not mutually consistent.
  void validate() const;

  friend bool operator==(const GruParams&, const GruParams&) = default;
};

/// Context-integrated GRU. Input weights are W(z) with w_ki = A_ki . G(z),
/// applied in the equivalent form A (x ⊗ G(z)); column i*m + j of each A
/// multiplies x_i * g_j(z).
struct CiRnnParams {
  Matrix As, Ah, Ar;  // n_h x (n_x * m)
  Matrix Us, Uh, Ur;  // n_h x n_h
  Matrix V;           // n_y x n_h
  Vector b_y;         // n_y
  BasisSpec basis;

  std::size_t n_x() const noexcept { return basis.m == 0 ? 0 : As.cols() / basis.m; }
  std::size_t n_z() const noexcept { return basis.n_z; }
  std::size_t n_h() const noexcept { return Us.rows(); }
  std::size_t n_y() const noexcept { return V.rows(); }

  void validate() const;

  friend bool operator==(const CiRnnParams&, const CiRnnParams&) = default;
};

/// Gradients share the parameter layout.
using GruGradients = GruParams;
using CiRnnGradients = CiRnnParams;

enum class ModelKind { gru, cirnn };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

using Model = std::variant<GruParams, CiRnnParams>;
ModelKind kind_of(const Model& model) noexcept;

/// Named view of one parameter group (e.g. "As"), flattened row-major.
template <typename T>
struct BasicParamGroup {
  std::string_view name;
  std::span<T> values;
  std::size_t rows;
  std::size_t cols;
};
using ParamGroup = BasicParamGroup<double>;
using ConstParamGroup = BasicParamGroup<const double>;

inline constexpr std::size_t kParamGroups = 8;

std::array<ParamGroup, kParamGroups> param_groups(GruParams& p);
std::array<ConstParamGroup, kParamGroups> param_groups(const GruParams& p);
std::array<ParamGroup, kParamGroups> param_groups(CiRnnParams& p);
std::array<ConstParamGroup, kParamGroups> param_groups(const CiRnnParams& p);

/// Same shapes, all zeros.
GruParams zeros_like(const GruParams& p);
CiRnnParams zeros_like(const CiRnnParams& p);

/// Uniform(-L, L) with L = sqrt(6 / (cols + rows)) per matrix; b_y = 0.
GruParams init_gru(std::size_t n_x, std::size_t n_h, std::size_t n_y, Rng& rng);
CiRnnParams init_cirnn(std::size_t n_x, const BasisSpec& basis, std::size_t n_h, std::size_t n_y,
                       Rng& rng);

/// Everything the gradient computations need from one timestep.
struct StepRecord {
  Vector x;      // primary input
  Vector z;      // context (empty for the plain GRU)
  Vector g;      // G(z) (empty for the plain GRU)
  Vector input;  // what the input weights multiply: x ⊗ G(z), or x for the plain GRU
  Vector h_prev;
  Vector r;      // reset gate
  Vector s;      // update (set) gate
  Vector cand;   // candidate state h~
  Vector h;
  Vector u;      // V h + b_y
  Vector y_hat;  // f(u), f = identity
};

struct Trace {
  std::vector<StepRecord> steps;
};

struct ForwardResult {
  Vector y_hat;  // prediction at the final step
  Trace trace;
};

StepRecord gru_step(const GruParams& p, std::span<const double> x, std::span<const double> h_prev);
StepRecord cirnn_step(const CiRnnParams& p, std::span<const double> x, std::span<const double> z,
                      std::span<const double> h_prev);

/// f(V h + b_y) with f the identity.
Vector output(const GruParams& p, std::span<const double> h);
Vector output(const CiRnnParams& p, std::span<const double> h);

/// Runs the recurrence from h0 (zeros when empty) and returns the final-step
/// prediction with the full trace. Rows of xs/zs are timesteps.
ForwardResult forward_sequence(const GruParams& p, const Matrix& xs, const Vector& h0 = {});
ForwardResult forward_sequence(const CiRnnParams& p, const Matrix& xs, const Matrix& zs,
                               const Vector& h0 = {});
ForwardResult forward_sequence(const GruParams& p, std::span<const Vector> xs, const Vector& h0 = {});
ForwardResult forward_sequence(const CiRnnParams& p, std::span<const Vector> xs,
                               std::span<const Vector> zs, const Vector& h0 = {});
/// zs must be non-null exactly when the model is a CiRNN.
ForwardResult forward_sequence(const Model& model, const Matrix& xs, const Matrix* zs);

/// Final-step prediction only, without keeping a trace.
Vector predict(const Model& model, const Matrix& xs, const Matrix* zs);

/// Splits an n_h x (n_x * m) coefficient matrix into n_x blocks of n_h x m;
/// block i holds the basis coefficients of primary feature i.
std::vector<Matrix> feature_blocks(const Matrix& a, std::size_t m);
/// Inverse of feature_blocks. Throws ShapeError for ragged blocks.
Matrix join_feature_blocks(std::span<const Matrix> blocks);

/// The GRU whose input weights are W(z*) for a fixed context z*.
GruParams gru_at_context(const CiRnnParams& p, std::span<const double> z);

}  // namespace cirnn
