// Compiled with -mavx2; only reached through avx2_table() after a CPUID check.
#include "semvote/kernels.hpp"

#include <algorithm>

#if defined(__AVX2__)
#include <immintrin.h>

namespace semvote::kernels::avx2 {

void pairwise_agreement(std::span<const std::int32_t> ids, std::size_t n, std::size_t d,
                        std::span<std::int64_t> out) {
  std::fill(out.begin(), out.begin() + n, 0);
  const std::size_t body = d & ~std::size_t{7};
  for (std::size_t a = 0; a < n; ++a) {
    const std::int32_t* ra = ids.data() + a * d;
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::int32_t* rb = ids.data() + b * d;
      std::int64_t same = 0;
      for (std::size_t j = 0; j < body; j += 8) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ra + j));
        __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rb + j));
        int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(x, y)));
        same += __builtin_popcount(static_cast<unsigned>(mask));
      }
      for (std::size_t j = body; j < d; ++j) same += ra[j] == rb[j];
      out[a] += same;
      out[b] += same;
    }
  }
}

std::int64_t gather_sum(std::span<const std::int32_t> values, std::span<const std::uint32_t> idx) {
  const std::size_t body = idx.size() & ~std::size_t{7};
  // 64-bit lanes so long index vectors cannot overflow.
  __m256i acc_lo = _mm256_setzero_si256();
  __m256i acc_hi = _mm256_setzero_si256();
  for (std::size_t k = 0; k < body; k += 8) {
    __m256i vi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx.data() + k));
    __m256i g = _mm256_i32gather_epi32(values.data(), vi, 4);
    acc_lo = _mm256_add_epi64(acc_lo, _mm256_cvtepi32_epi64(_mm256_castsi256_si128(g)));
    acc_hi = _mm256_add_epi64(acc_hi, _mm256_cvtepi32_epi64(_mm256_extracti128_si256(g, 1)));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), _mm256_add_epi64(acc_lo, acc_hi));
  std::int64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (std::size_t k = body; k < idx.size(); ++k) total += values[idx[k]];
  return total;
}

}  // namespace semvote::kernels::avx2

#endif
