// SPDX-License-Identifier: Apache-2.0
#include "cirnn/linalg.hpp"

#include <cmath>
#include <string>

#include "cirnn/simd.hpp"

namespace cirnn {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: left operand " + shape_string(a) + " does not conform with right operand " +
                     shape_string(b));
  }
  Matrix c(a.rows(), b.cols());
  simd::kernels().gemm(a.data(), b.data(), a.rows(), a.cols(), b.cols(), c.data());
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: matrix " + shape_string(a) + " times vector of length " +
                     std::to_string(x.size()));
  }
  Vector y(a.rows());
  simd::kernels().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> v) {
  if (a.rows() != v.size()) {
    throw ShapeError("matvec_transposed: matrix " + shape_string(a) +
                     " transposed times vector of length " + std::to_string(v.size()));
  }
  Vector y(a.cols());
  simd::kernels().gemv_t(a.data(), a.rows(), a.cols(), v.data(), y.data());
  return y;
}

void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double alpha) {
  if (a.rows() != u.size() || a.cols() != v.size()) {
    throw ShapeError("add_outer: target " + shape_string(a) + " vs outer product " +
                     std::to_string(u.size()) + "x" + std::to_string(v.size()));
  }
  simd::kernels().ger(a.data(), a.rows(), a.cols(), alpha, u.data(), v.data());
}

Vector kron(std::span<const double> x, std::span<const double> g) {
  if (x.empty() || g.empty()) throw ShapeError("kron: operands must be non-empty");
  Vector out(x.size() * g.size());
  simd::kernels().kron(x.data(), x.size(), g.data(), g.size(), out.data());
  return out;
}

double sigmoid(double x) noexcept {
  // Branching keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

Vector tanh(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "hadamard");
  Vector out(a.size());
  simd::kernels().mul(a.data(), b.data(), a.size(), out.data());
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "add");
  Vector out(a);
  simd::kernels().axpy(1.0, b.data(), b.size(), out.data());
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x, y, "axpy");
  simd::kernels().axpy(alpha, x.data(), x.size(), y.data());
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(std::span<const double> v) noexcept {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace cirnn
