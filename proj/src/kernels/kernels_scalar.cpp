// SPDX-License-Identifier: Apache-2.0
#include "cirnn/simd.hpp"

namespace cirnn::simd {
namespace {

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    double acc = 0.0;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    y[i] = acc;
  }
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    const double vi = v[i];
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * vi;
  }
}

void gemm(const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n,
          double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void ger(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
         const double* v) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double s = alpha * u[i];
    double* row = a + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += s * v[j];
  }
}

void kron(const double* x, std::size_t nx, const double* g, std::size_t ng, double* out) {
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ng; ++j) out[i * ng + j] = x[i] * g[j];
  }
}

void mul(const double* a, const double* b, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kTable{gemv, gemv_t, gemm, ger, kron, mul, axpy};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kTable; }

}  // namespace cirnn::simd
