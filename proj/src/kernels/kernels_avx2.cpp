// SPDX-License-Identifier: Apache-2.0
// Built with -mavx2 only (no -mfma): products and sums must round exactly as
// the scalar reference does.
#include <immintrin.h>

#include "cirnn/simd.hpp"

namespace cirnn::simd {
namespace {

constexpr std::size_t kLanes = 4;

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + kLanes <= rows; i += kLanes) {
    const double* r0 = a + (i + 0) * cols;
    const double* r1 = a + (i + 1) * cols;
    const double* r2 = a + (i + 2) * cols;
    const double* r3 = a + (i + 3) * cols;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < cols; ++k) {
      const __m256d col = _mm256_set_pd(r3[k], r2[k], r1[k], r0[k]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[k])));
    }
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < rows; ++i) {
    const double* row = a + i * cols;
    double acc = 0.0;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    y[i] = acc;
  }
}

// row[j..j+3] op= scale * src[j..j+3], with a scalar tail
inline void scaled_add_row(double* row, const double* src, double scale, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(src + j), s);
    _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), prod));
  }
  for (; j < n; ++j) row[j] += src[j] * scale;
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) scaled_add_row(y, a + i * cols, v[i], cols);
}

void gemm(const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n,
          double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) scaled_add_row(crow, b + p * n, a[i * k + p], n);
  }
}

void ger(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
         const double* v) {
  for (std::size_t i = 0; i < rows; ++i) scaled_add_row(a + i * cols, v, alpha * u[i], cols);
}

void kron(const double* x, std::size_t nx, const double* g, std::size_t ng, double* out) {
  for (std::size_t i = 0; i < nx; ++i) {
    const __m256d xi = _mm256_set1_pd(x[i]);
    double* dst = out + i * ng;
    std::size_t j = 0;
    for (; j + kLanes <= ng; j += kLanes) {
      _mm256_storeu_pd(dst + j, _mm256_mul_pd(xi, _mm256_loadu_pd(g + j)));
    }
    for (; j < ng; ++j) dst[j] = x[i] * g[j];
  }
}

void mul(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, std::size_t n, double* y) {
  const __m256d s = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(s, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kTable{gemv, gemv_t, gemm, ger, kron, mul, axpy};

}  // namespace

const KernelTable& avx2_kernels() noexcept { return kTable; }

}  // namespace cirnn::simd
