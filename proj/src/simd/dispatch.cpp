#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hplan/simd.hpp"

namespace hplan::simd {

#if HPLAN_HAVE_AVX2
const KernelTable* avx2_kernels_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if HPLAN_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const char* env = std::getenv("HPLAN_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return detected_isa();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

const KernelTable* avx2_kernels() {
#if HPLAN_HAVE_AVX2
  return detected_isa() == Isa::Avx2 ? avx2_kernels_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  if (active_isa() == Isa::Avx2) {
    if (const KernelTable* t = avx2_kernels()) return *t;
  }
  return scalar_kernels();
}

}  // namespace hplan::simd
