#pragma once

// Data-parallel inner loops with a scalar reference and ISA-specific variants.
// The active table is chosen once at startup from CPUID; SEMVOTE_FORCE_SCALAR=1
// pins the scalar reference.

#include <cstdint>
#include <span>
#include <string_view>

namespace semvote::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // ids is row-major [n][d] of interned (status, payload) ids. out[i] receives
  // sum over columns j of |{i' != i : ids[i][j] == ids[i'][j]}|.
  void (*pairwise_agreement)(std::span<const std::int32_t> ids, std::size_t n, std::size_t d,
                             std::span<std::int64_t> out);
  // Sum of values[idx[k]] over k. Indices must be < values.size().
  std::int64_t (*gather_sum)(std::span<const std::int32_t> values, std::span<const std::uint32_t> idx);
};

const KernelTable& scalar_table();
// Null when the variant is not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable& active();

namespace scalar {
void pairwise_agreement(std::span<const std::int32_t> ids, std::size_t n, std::size_t d,
                        std::span<std::int64_t> out);
std::int64_t gather_sum(std::span<const std::int32_t> values, std::span<const std::uint32_t> idx);
}  // namespace scalar

namespace avx2 {
void pairwise_agreement(std::span<const std::int32_t> ids, std::size_t n, std::size_t d,
                        std::span<std::int64_t> out);
std::int64_t gather_sum(std::span<const std::int32_t> values, std::span<const std::uint32_t> idx);
}  // namespace avx2

}  // namespace semvote::kernels
