// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "cirnn/simd.hpp"

namespace cirnn::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(CIRNN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(CIRNN_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable& table_for(Isa isa) noexcept {
  switch (isa) {
#if defined(CIRNN_HAVE_AVX2)
    case Isa::avx2: return avx2_kernels();
#endif
#if defined(CIRNN_HAVE_NEON)
    case Isa::neon: return neon_kernels();
#endif
    default: return scalar_kernels();
  }
}

struct Active {
  std::atomic<Isa> isa;
  std::atomic<const KernelTable*> table;

  Active() {
    const Isa detected = detect_isa();
    isa.store(detected);
    table.store(&table_for(detected));
  }
};

Active& active() noexcept {
  static Active state;
  return state;
}

}  // namespace

Isa detect_isa() noexcept {
  if (const char* env = std::getenv("CIRNN_ISA")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa) && isa_supported(isa)) return isa;
    }
  }
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() noexcept { return active().isa.load(std::memory_order_relaxed); }

const KernelTable& kernels() noexcept { return *active().table.load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
  if (!isa_supported(isa)) return false;
  active().table.store(&table_for(isa));
  active().isa.store(isa);
  return true;
}

}  // namespace cirnn::simd
