#include <cstdlib>
#include <string_view>

#include "semvote/kernels.hpp"

namespace semvote::kernels {

std::string_view to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, &scalar::pairwise_agreement, &scalar::gather_sum};
  return table;
}

const KernelTable* avx2_table() {
#if defined(SEMVOTE_HAVE_AVX2)
  static const KernelTable table{Isa::kAvx2, &avx2::pairwise_agreement, &avx2::gather_sum};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* force = std::getenv("SEMVOTE_FORCE_SCALAR");
    if (force && std::string_view(force) == "1") return scalar_table();
    if (const auto* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace semvote::kernels
