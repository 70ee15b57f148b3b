#include "semvote/kernels.hpp"

#include <algorithm>

namespace semvote::kernels::scalar {

void pairwise_agreement(std::span<const std::int32_t> ids, std::size_t n, std::size_t d,
                        std::span<std::int64_t> out) {
  std::fill(out.begin(), out.begin() + n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    const std::int32_t* ra = ids.data() + a * d;
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::int32_t* rb = ids.data() + b * d;
      std::int64_t same = 0;
      for (std::size_t j = 0; j < d; ++j) same += ra[j] == rb[j];
      out[a] += same;
      out[b] += same;
    }
  }
}

std::int64_t gather_sum(std::span<const std::int32_t> values, std::span<const std::uint32_t> idx) {
  std::int64_t total = 0;
  for (auto i : idx) total += values[i];
  return total;
}

}  // namespace semvote::kernels::scalar
