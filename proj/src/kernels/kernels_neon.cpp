// SPDX-License-Identifier: Apache-2.0
// AArch64 variant. Separate multiply and add intrinsics only; the build
// passes -ffp-contract=off so they are not fused.
#include <arm_neon.h>

#include "cirnn/simd.hpp"

namespace cirnn::simd {
namespace {

constexpr std::size_t kLanes = 2;

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + kLanes <= rows; i += kLanes) {
    const double* r0 = a + i * cols;
    const double* r1 = r0 + cols;
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < cols; ++k) {
      float64x2_t col = vsetq_lane_f64(r1[k], vdupq_n_f64(r0[k]), 1);
      acc = vaddq_f64(acc, vmulq_f64(col, vdupq_n_f64(x[k])));
    }
    vst1q_f64(y + i, acc);
  }
  for (; i < rows; ++i) {
    const double* row = a + i * cols;
    double acc = 0.0;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    y[i] = acc;
  }
}

inline void scaled_add_row(double* row, const double* src, double scale, std::size_t n) {
  const float64x2_t s = vdupq_n_f64(scale);
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    vst1q_f64(row + j, vaddq_f64(vld1q_f64(row + j), vmulq_f64(vld1q_f64(src + j), s)));
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
    const float64x2_t xi = vdupq_n_f64(x[i]);
    double* dst = out + i * ng;
    std::size_t j = 0;
    for (; j + kLanes <= ng; j += kLanes) vst1q_f64(dst + j, vmulq_f64(xi, vld1q_f64(g + j)));
    for (; j < ng; ++j) dst[j] = x[i] * g[j];
  }
}

void mul(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, std::size_t n, double* y) {
  const float64x2_t s = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(s, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kTable{gemv, gemv_t, gemm, ger, kron, mul, axpy};

}  // namespace

const KernelTable& neon_kernels() noexcept { return kTable; }

}  // namespace cirnn::simd
