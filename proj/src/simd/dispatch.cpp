#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "alebk/simd/kernels.hpp"

namespace alebk::simd {

#if defined(ALEBK_HAVE_AVX2)
const KernelTable& avx2_kernel_table() noexcept;
#endif

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() noexcept {
#if defined(ALEBK_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (avx2_kernels()) out.push_back(Backend::Avx2);
  return out;
}

namespace {

const KernelTable* pick_default() noexcept {
  if (const char* env = std::getenv("ALEBK_SIMD")) {
    if (std::string_view(env) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void set_backend(Backend b) {
  const KernelTable* t = nullptr;
  switch (b) {
    case Backend::Scalar:
      t = &scalar_kernels();
      break;
    case Backend::Avx2:
      t = avx2_kernels();
      break;
  }
  if (!t) throw std::invalid_argument("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  slot().store(t, std::memory_order_release);
}

ScopedBackend::ScopedBackend(Backend b) : previous_(active().backend) { set_backend(b); }
ScopedBackend::~ScopedBackend() { set_backend(previous_); }

}  // namespace alebk::simd
