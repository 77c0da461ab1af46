// SPDX-License-Identifier: Apache-2.0
#pragma once

// Inner-loop kernels with a scalar reference implementation and SIMD
// variants (AVX2 on x86-64, NEON on AArch64) chosen at runtime.
//
// Every SIMD variant vectorizes across independent outputs and keeps the
// per-output accumulation order of the scalar loop, and no variant uses
// fused multiply-add. Results are therefore bit-identical across variants,
// which the equivalence tests check with memcmp.

#include <cstddef>
#include <string_view>

namespace cirnn::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

/// Function table for one instruction set. All matrices are row-major and
/// output buffers never alias inputs.
struct KernelTable {
  // y[i] = sum_k a[i*cols + k] * x[k]
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y[j] = sum_i a[i*cols + j] * v[i]
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* v, double* y);
  // c = a (m x k) * b (k x n)
  void (*gemm)(const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n,
               double* c);
  // a[i*cols + j] += (alpha * u[i]) * v[j]
  void (*ger)(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
              const double* v);
  // out[i*ng + j] = x[i] * g[j]
  void (*kron)(const double* x, std::size_t nx, const double* g, std::size_t ng, double* out);
  // out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, std::size_t n, double* out);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, std::size_t n, double* y);
};

const KernelTable& scalar_kernels() noexcept;
#if defined(CIRNN_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif
#if defined(CIRNN_HAVE_NEON)
const KernelTable& neon_kernels() noexcept;
#endif

/// Whether the running CPU can execute the given variant.
bool isa_supported(Isa isa) noexcept;

/// Best supported variant, unless the CIRNN_ISA environment variable names
/// another supported one ("scalar", "avx2", "neon").
Isa detect_isa() noexcept;

Isa active_isa() noexcept;
const KernelTable& kernels() noexcept;

/// Forces a variant for the whole process. Returns false (and changes
/// nothing) when the CPU cannot run it.
bool set_isa(Isa isa) noexcept;

}  // namespace cirnn::simd
