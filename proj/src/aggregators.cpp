#include "semvote/aggregators.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "semvote/kernels.hpp"
#include "semvote/selection.hpp"

namespace semvote {
namespace {

constexpr char kSeparator = '\x1f';

struct Group {
  std::vector<std::size_t> positions;
  double score = 0.0;
};

// Shortest member (length, then source, then index for identical text).
template <typename GetCandidate>
std::size_t representative_of(const Group& g, GetCandidate&& at) {
  return *std::min_element(g.positions.begin(), g.positions.end(), [&](std::size_t a, std::size_t b) {
    const Candidate& ca = at(a);
    const Candidate& cb = at(b);
    if (ca.source != cb.source) return source_precedes(ca.source, cb.source);
    return ca.index < cb.index;
  });
}

// Highest score wins; equal scores go to the lexicographically smallest representative source.
template <typename GetCandidate>
SelectionResult pick_group(Method method, const std::vector<Group>& groups, GetCandidate&& at) {
  SelectionResult result;
  result.method = method;
  result.cluster_count = groups.size();
  const Group* best = nullptr;
  std::size_t best_rep = 0;
  for (const auto& g : groups) {
    result.largest_cluster = std::max(result.largest_cluster, g.positions.size());
    std::size_t rep = representative_of(g, at);
    if (!best || g.score > best->score ||
        (g.score == best->score && at(rep).source < at(best_rep).source)) {
      best = &g;
      best_rep = rep;
    }
  }
  if (best) result.selected = at(best_rep).index;
  return result;
}

template <typename Key>
std::vector<Group> collect(std::map<Key, Group>& by_key) {
  std::vector<Group> out;
  out.reserve(by_key.size());
  for (auto& [_, g] : by_key) out.push_back(std::move(g));
  return out;
}

}  // namespace

std::string output_pattern_key(const Fingerprint& fp) {
  std::string key;
  for (std::size_t j = 0; j < fp.entries.size(); ++j) {
    if (j) key.push_back(kSeparator);
    key += fp.entries[j].payload;
  }
  return key;
}

SelectionResult select_majority_vote(std::span<const ScoredCandidate> pool) {
  std::map<std::string, Group> by_key;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!pool[i].fingerprint.all_success) continue;
    auto& g = by_key[output_pattern_key(pool[i].fingerprint)];
    g.positions.push_back(i);
    g.score += 1.0;
  }
  auto groups = collect(by_key);
  return pick_group(Method::kMajority, groups, [&](std::size_t i) -> const Candidate& { return pool[i].candidate; });
}

SelectionResult select_ast_majority(std::span<const Candidate> pool,
                                    std::span<const std::optional<std::string>> canon_keys) {
  std::map<std::string, Group> by_key;
  for (std::size_t i = 0; i < pool.size() && i < canon_keys.size(); ++i) {
    if (!canon_keys[i]) continue;
    auto& g = by_key[*canon_keys[i]];
    g.positions.push_back(i);
    g.score += 1.0;
  }
  auto groups = collect(by_key);
  return pick_group(Method::kAstMajority, groups, [&](std::size_t i) -> const Candidate& { return pool[i]; });
}

double success_rate(const Fingerprint& fp) {
  if (fp.entries.empty()) return 0.0;
  auto ok = std::count_if(fp.entries.begin(), fp.entries.end(),
                          [](const ExecRecord& r) { return r.status == ExecStatus::kOk; });
  return static_cast<double>(ok) / static_cast<double>(fp.entries.size());
}

SelectionResult select_weighted_vote(std::span<const ScoredCandidate> pool, WvGrouping grouping) {
  std::map<std::vector<ExecRecord>, Group> by_fp;
  // Weights are k/D; summing the integer counts keeps score ties exact.
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& fp = pool[i].fingerprint;
    if (grouping == WvGrouping::kAllSuccessOnly && !fp.all_success) continue;
    auto& g = by_fp[fp.entries];
    g.positions.push_back(i);
    g.score += static_cast<double>(std::count_if(fp.entries.begin(), fp.entries.end(),
                                                 [](const ExecRecord& r) { return r.status == ExecStatus::kOk; }));
  }
  auto groups = collect(by_fp);
  auto result =
      pick_group(Method::kWeighted, groups, [&](std::size_t i) -> const Candidate& { return pool[i].candidate; });
  for (const auto& sc : pool) result.scores.push_back({sc.candidate.index, success_rate(sc.fingerprint)});
  return result;
}

std::vector<std::int64_t> mbr_scores(std::span<const ScoredCandidate> pool) {
  const std::size_t n = pool.size();
  if (n == 0) return {};
  const std::size_t d = pool.front().fingerprint.size();
  // Intern each (status, payload) per column so agreement is an integer compare.
  std::vector<std::int32_t> ids(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    std::map<const ExecRecord*, std::int32_t, bool (*)(const ExecRecord*, const ExecRecord*)> seen(
        [](const ExecRecord* a, const ExecRecord* b) { return *a < *b; });
    for (std::size_t i = 0; i < n; ++i) {
      const ExecRecord* rec = &pool[i].fingerprint.entries.at(j);
      auto [it, _] = seen.emplace(rec, static_cast<std::int32_t>(seen.size()));
      ids[i * d + j] = it->second;
    }
  }
  std::vector<std::int64_t> scores(n);
  kernels::active().pairwise_agreement(ids, n, d, scores);
  return scores;
}

SelectionResult select_mbr_exec(std::span<const ScoredCandidate> pool) {
  SelectionResult result;
  result.method = Method::kMbr;
  if (pool.empty()) return result;
  auto scores = mbr_scores(pool);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const auto& ci = pool[i].candidate;
    const auto& cb = pool[best].candidate;
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] &&
         (ci.source != cb.source ? source_precedes(ci.source, cb.source) : ci.index < cb.index))) {
      best = i;
    }
  }
  result.selected = pool[best].candidate.index;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    result.scores.push_back({pool[i].candidate.index, static_cast<double>(scores[i])});
  }
  return result;
}

SelectionResult select_best_of_n(std::span<const Candidate> pool) {
  SelectionResult result;
  result.method = Method::kBestOfN;
  auto it = std::find_if(pool.begin(), pool.end(), [](const Candidate& c) { return c.is_syntactically_valid; });
  if (it != pool.end()) result.selected = it->index;
  return result;
}

SelectionResult select_greedy(const std::optional<Candidate>& greedy) {
  SelectionResult result;
  result.method = Method::kGreedy;
  if (greedy && greedy->is_syntactically_valid) result.selected = greedy->index;
  return result;
}

}  // namespace semvote
