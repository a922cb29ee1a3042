#include <atomic>
#include <cstdlib>
#include <string>

#include "ssar/error.hpp"
#include "ssar/numeric/kernels.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ssar::numeric::kernels {
namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// Batch activations are a few MB each and are allocated and freed every
// step. glibc serves such blocks with fresh mmaps by default, and refaulting
// those pages costs more than the matrix products themselves, so keep freed
// memory in the heap instead.
void keep_freed_memory() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

Backend detect() {
  keep_freed_memory();
  if (const char* forced = std::getenv("SSAR_SIMD")) {
    const std::string name = forced;
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
    if (name == "neon" && available(Backend::Neon)) return Backend::Neon;
  }
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend>& active_slot() {
  static std::atomic<Backend> slot{detect()};
  return slot;
}

}  // namespace

bool available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return detail::avx2_table() != nullptr && cpu_has_avx2();
    case Backend::Neon:
      return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table(Backend backend) {
  switch (backend) {
    case Backend::Avx2:
      if (const auto* t = detail::avx2_table()) return *t;
      break;
    case Backend::Neon:
      if (const auto* t = detail::neon_table()) return *t;
      break;
    case Backend::Scalar:
      break;
  }
  return detail::scalar_table();
}

Backend active_backend() { return active_slot().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!available(backend))
    throw Error("simd_unavailable", "requested SIMD backend is not available on this CPU",
                {{"backend", std::string(backend_name(backend))}});
  active_slot().store(backend, std::memory_order_relaxed);
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace ssar::numeric::kernels
