// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "cirnn/tensor.hpp"

namespace cirnn {

/// a * b. Throws ShapeError naming both operands unless a.cols == b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * x
Vector matvec(const Matrix& a, std::span<const double> x);
/// a^T * v
Vector matvec_transposed(const Matrix& a, std::span<const double> v);

/// a += alpha * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v,
               double alpha = 1.0);

/// Kronecker product of two vectors: element (i * g.size() + j) is x[i] * g[j].
Vector kron(std::span<const double> x, std::span<const double> g);

Vector sigmoid(std::span<const double> v);
Vector tanh(std::span<const double> v);
Vector hadamard(std::span<const double> a, std::span<const double> b);

Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Matrix transpose(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> v) noexcept;

double sigmoid(double x) noexcept;

}  // namespace cirnn
