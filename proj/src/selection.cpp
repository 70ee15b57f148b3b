#include "semvote/selection.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "semvote/error.hpp"

namespace semvote {

Fingerprint make_fingerprint(std::vector<ExecRecord> records, std::size_t expected_d) {
  if (records.size() != expected_d) {
    throw Error(ErrorKind::kStructural, "fingerprint has " + std::to_string(records.size()) +
                                            " records, input set declares " + std::to_string(expected_d));
  }
  Fingerprint fp;
  fp.all_success = std::all_of(records.begin(), records.end(),
                               [](const ExecRecord& r) { return r.status == ExecStatus::kOk; });
  fp.entries = std::move(records);
  return fp;
}

bool source_precedes(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<Cluster> cluster_by_fingerprint(std::span<const ScoredCandidate> pool) {
  if (pool.empty()) throw Error(ErrorKind::kEmptyPool, "cannot cluster an empty pool");
  const std::size_t d = pool.front().fingerprint.size();

  std::map<std::vector<ExecRecord>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].fingerprint.size() != d) {
      throw Error(ErrorKind::kStructural, "fingerprints of unequal length in one pool");
    }
    groups[pool[i].fingerprint.entries].push_back(i);
  }

  std::vector<Cluster> clusters;
  clusters.reserve(groups.size());
  for (auto& [entries, positions] : groups) {
    // Identical sources fall back to the smaller index; the chosen program text is the same.
    auto best = *std::min_element(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
      const auto& sa = pool[a].candidate.source;
      const auto& sb = pool[b].candidate.source;
      if (sa != sb) return source_precedes(sa, sb);
      return pool[a].candidate.index < pool[b].candidate.index;
    });
    Cluster c;
    c.fingerprint = pool[positions.front()].fingerprint;
    for (auto p : positions) c.members.push_back(pool[p].candidate.index);
    std::sort(c.members.begin(), c.members.end());
    c.representative = pool[best].candidate.index;
    c.representative_source = pool[best].candidate.source;
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.representative_source < b.representative_source;
  });
  return clusters;
}

SelectionResult select_semanticvote(std::span<const Cluster> clusters) {
  SelectionResult result;
  result.method = Method::kSemanticVote;
  if (clusters.empty()) return result;

  auto better = [](const Cluster& a, const Cluster& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.representative_source < b.representative_source;
  };
  const Cluster* best_valid = nullptr;
  const Cluster* best_any = nullptr;
  for (const auto& c : clusters) {
    if (!best_any || better(c, *best_any)) best_any = &c;
    if (c.fingerprint.all_success && (!best_valid || better(c, *best_valid))) best_valid = &c;
    result.largest_cluster = std::max(result.largest_cluster, c.size());
  }
  result.cluster_count = clusters.size();
  result.selected = (best_valid ? best_valid : best_any)->representative;
  return result;
}

SelectionResult run_semanticvote(std::span<const ScoredCandidate> pool) {
  if (pool.empty()) {
    SelectionResult none;
    none.method = Method::kSemanticVote;
    return none;
  }
  auto clusters = cluster_by_fingerprint(pool);
  return select_semanticvote(clusters);
}

}  // namespace semvote
