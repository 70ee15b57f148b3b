#include "semvote/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semvote/error.hpp"
#include "semvote/kernels.hpp"

namespace semvote::stats {
namespace {

constexpr double kAlpha = 0.025;

double finish_p(double le_zero, double ge_zero, PValueRule rule) {
  double tail = std::min(le_zero, ge_zero);
  if (rule == PValueRule::kTwoSidedDoubled) tail *= 2.0;
  return std::clamp(tail, 0.0, 1.0);
}

// Avoid printing "-0.00".
double tidy(double v) { return v == 0.0 ? 0.0 : v; }

}  // namespace

void PairedSample::validate() const {
  if (a.size() != b.size()) throw Error(ErrorKind::kStructural, "paired sample lengths differ");
  if (a.empty()) throw Error(ErrorKind::kStructural, "paired sample has no problems");
  auto is_bit = [](std::uint8_t v) { return v <= 1; };
  if (!std::all_of(a.begin(), a.end(), is_bit) || !std::all_of(b.begin(), b.end(), is_bit)) {
    throw Error(ErrorKind::kStructural, "paired sample entries must be 0 or 1");
  }
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x > limit);
  return x % bound;
}

BootstrapReport paired_bootstrap(const PairedSample& sample, std::size_t r, std::uint64_t seed, PValueRule rule) {
  sample.validate();
  if (r < 1) throw Error(ErrorKind::kStructural, "bootstrap needs at least one resample");
  const std::size_t n = sample.n_problems();
  std::vector<std::int32_t> diff(n);
  std::int64_t observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = static_cast<std::int32_t>(sample.a[i]) - static_cast<std::int32_t>(sample.b[i]);
    observed += diff[i];
  }

  std::mt19937_64 rng(seed);
  const auto& kern = kernels::active();
  std::vector<std::uint32_t> idx(n);
  std::vector<std::int64_t> sums(r);
  for (std::size_t s = 0; s < r; ++s) {
    for (auto& v : idx) v = static_cast<std::uint32_t>(bounded_draw(rng, n));
    sums[s] = kern.gather_sum(diff, idx);
  }
  std::sort(sums.begin(), sums.end());

  const double scale = 100.0 / static_cast<double>(n);
  const std::size_t lo = std::min(r - 1, static_cast<std::size_t>(std::floor(kAlpha * static_cast<double>(r))));
  const auto le_zero = static_cast<double>(std::upper_bound(sums.begin(), sums.end(), 0) - sums.begin());
  const auto ge_zero = static_cast<double>(sums.end() - std::lower_bound(sums.begin(), sums.end(), 0));

  BootstrapReport rep;
  rep.delta_pp = tidy(scale * static_cast<double>(observed));
  rep.ci_low = tidy(scale * static_cast<double>(sums[lo]));
  rep.ci_high = tidy(scale * static_cast<double>(sums[r - 1 - lo]));
  rep.p_value = finish_p(le_zero / static_cast<double>(r), ge_zero / static_cast<double>(r), rule);
  rep.resamples = r;
  rep.seed = seed;
  rep.n_problems = n;
  rep.mode = BootstrapMode::kSampled;
  rep.rule = rule;
  return rep;
}

BootstrapReport paired_bootstrap_exact(const PairedSample& sample, PValueRule rule) {
  sample.validate();
  const std::size_t n = sample.n_problems();
  std::size_t plus = 0, minus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    plus += sample.a[i] > sample.b[i];
    minus += sample.a[i] < sample.b[i];
  }
  const double dn = static_cast<double>(n);
  const double lp = plus ? std::log(plus / dn) : 0.0;
  const double lm = minus ? std::log(minus / dn) : 0.0;
  const std::size_t zero = n - plus - minus;
  const double lz = zero ? std::log(zero / dn) : 0.0;

  // Resampled sum = k_plus - k_minus with (k_plus, k_minus, k_zero) ~ Multinomial(n; p+, p-, p0).
  std::map<std::int64_t, double> mass;
  for (std::size_t kp = 0; kp <= n; ++kp) {
    if (kp && !plus) break;
    for (std::size_t km = 0; kp + km <= n; ++km) {
      if (km && !minus) break;
      const std::size_t kz = n - kp - km;
      if (kz && !zero) continue;
      double logw = std::lgamma(dn + 1) - std::lgamma(kp + 1.0) - std::lgamma(km + 1.0) - std::lgamma(kz + 1.0) +
                    kp * lp + km * lm + kz * lz;
      mass[static_cast<std::int64_t>(kp) - static_cast<std::int64_t>(km)] += std::exp(logw);
    }
  }

  const double scale = 100.0 / dn;
  double le_zero = 0.0, ge_zero = 0.0;
  for (const auto& [v, w] : mass) {
    if (v <= 0) le_zero += w;
    if (v >= 0) ge_zero += w;
  }
  // Lower: smallest v with P(X <= v) > alpha. Upper mirrors it on the survival side.
  constexpr double kEps = 1e-12;
  double cdf = 0.0;
  std::int64_t low = mass.begin()->first;
  for (const auto& [v, w] : mass) {
    cdf += w;
    if (cdf > kAlpha + kEps) {
      low = v;
      break;
    }
  }
  double sf = 0.0;
  std::int64_t high = mass.rbegin()->first;
  for (auto it = mass.rbegin(); it != mass.rend(); ++it) {
    sf += it->second;
    if (sf > kAlpha + kEps) {
      high = it->first;
      break;
    }
  }

  BootstrapReport rep;
  rep.delta_pp = tidy(scale * (static_cast<double>(plus) - static_cast<double>(minus)));
  rep.ci_low = tidy(scale * static_cast<double>(low));
  rep.ci_high = tidy(scale * static_cast<double>(high));
  rep.p_value = finish_p(le_zero, ge_zero, rule);
  rep.resamples = 0;
  rep.n_problems = n;
  rep.mode = BootstrapMode::kExact;
  rep.rule = rule;
  rep.rng = "none";
  return rep;
}

std::string BootstrapReport::to_json() const {
  nlohmann::ordered_json j;
  j["delta_pp"] = std::round(delta_pp * 1e6) / 1e6;
  j["ci_low"] = std::round(ci_low * 1e6) / 1e6;
  j["ci_high"] = std::round(ci_high * 1e6) / 1e6;
  j["p_value"] = std::round(p_value * 1e6) / 1e6;
  j["resamples"] = resamples;
  j["seed"] = seed;
  j["n_problems"] = n_problems;
  j["mode"] = mode == BootstrapMode::kExact ? "exact" : "sampled";
  j["p_rule"] = rule == PValueRule::kTailMin ? "tail_min" : "two_sided_doubled";
  j["rng"] = rng;
  return j.dump();
}

std::string BootstrapReport::to_markdown_row(const std::string& label, double pass_a, double pass_b) const {
  return fmt::format("| {} | {:.2f} | {:.2f} | {:+.2f} | [{:+.2f}, {:+.2f}] | {:.3f} |", label, pass_a, pass_b,
                     tidy(delta_pp), tidy(ci_low), tidy(ci_high), p_value);
}

}  // namespace semvote::stats
