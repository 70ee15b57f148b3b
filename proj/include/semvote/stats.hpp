#pragma once

// Paired problem-level bootstrap for pass@1 differences between two methods.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace semvote::stats {

struct PairedSample {
  std::vector<std::uint8_t> a;  // per-problem pass bits, method A
  std::vector<std::uint8_t> b;  // method B, index-aligned

  std::size_t n_problems() const { return a.size(); }
  // Throws Error(kStructural) on length mismatch, non-bit values, or n == 0.
  void validate() const;
};

enum class PValueRule {
  // min(P(d* <= 0), P(d* >= 0)); matches the published bootstrap tables.
  kTailMin,
  // min(1, 2 * min(P(d* <= 0), P(d* >= 0))).
  kTwoSidedDoubled,
};

enum class BootstrapMode { kSampled, kExact };

struct BootstrapReport {
  double delta_pp = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  std::size_t resamples = 0;  // 0 in exact mode
  std::uint64_t seed = 0;
  std::size_t n_problems = 0;
  BootstrapMode mode = BootstrapMode::kSampled;
  PValueRule rule = PValueRule::kTailMin;
  std::string rng = "mt19937_64/rejection-v1";

  std::string to_json() const;
  // "| label | A | B | delta | [lo, hi] | p |" in the bootstrap-table layout.
  std::string to_markdown_row(const std::string& label, double pass_a, double pass_b) const;
};

// Unbiased draw in [0, bound) from the 64-bit engine by rejection.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound);

// r resamples of size n with replacement, deterministic in seed.
BootstrapReport paired_bootstrap(const PairedSample& sample, std::size_t r, std::uint64_t seed,
                                 PValueRule rule = PValueRule::kTailMin);

// Exact resampling distribution via the trinomial law of per-problem differences.
BootstrapReport paired_bootstrap_exact(const PairedSample& sample, PValueRule rule = PValueRule::kTailMin);

}  // namespace semvote::stats
