#include "stgc/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace stgc::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(STGC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() noexcept {
  if (const char* env = std::getenv("STGC_KERNELS"); env && std::string_view(env) == "scalar")
    return detail::kScalarTable;
#if defined(STGC_HAVE_AVX2)
  if (cpu_has_avx2()) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

}  // namespace

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw std::runtime_error("kernel variant not available on this CPU");
#if defined(STGC_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

const KernelTable& active() noexcept {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace stgc::kernels
