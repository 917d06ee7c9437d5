#include "c2bnet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace c2bnet::kernels {

const KernelTable& scalar_table();
#ifdef C2BNET_HAVE_AVX2_TU
const KernelTable& avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("C2BNET_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::avx2))
      return Backend::avx2;
    // unknown or unavailable value: fall through to detection
  }
  return detect_best();
}

std::atomic<const KernelTable*>& active_table_slot() {
  static std::atomic<const KernelTable*> slot{&table_for(initial_backend())};
  return slot;
}

} // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#ifdef C2BNET_HAVE_AVX2_TU
      return cpu_has_avx2();
#else
      return false;
#endif
  }
  return false;
}

Backend detect_best() {
  return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

const KernelTable& table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return scalar_table();
    case Backend::avx2:
#ifdef C2BNET_HAVE_AVX2_TU
      if (cpu_has_avx2()) return avx2_table();
#endif
      throw std::invalid_argument("avx2 kernel backend not available");
  }
  throw std::invalid_argument("unknown kernel backend");
}

void set_backend(Backend b) {
  active_table_slot().store(&table_for(b), std::memory_order_relaxed);
}

Backend active_backend() {
  const KernelTable* t = active_table_slot().load(std::memory_order_relaxed);
  return std::strcmp(t->name, "avx2") == 0 ? Backend::avx2 : Backend::scalar;
}

const KernelTable& table() {
  return *active_table_slot().load(std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

} // namespace c2bnet::kernels
