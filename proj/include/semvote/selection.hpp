#pragma once

// Fingerprint construction, exact-equality clustering and SemanticVote selection.

#include <span>
#include <string_view>
#include <vector>

#include "semvote/types.hpp"

namespace semvote {

// Throws Error(kStructural) if records.size() != expected_d.
Fingerprint make_fingerprint(std::vector<ExecRecord> records, std::size_t expected_d);

// "Shortest program" order: character count, then lexicographic source.
bool source_precedes(std::string_view a, std::string_view b);

// Partition by entry-wise fingerprint identity. Representatives and the output order
// (size descending, representative source ascending) depend only on source text.
// Throws Error(kEmptyPool) on an empty pool and Error(kStructural) on ragged fingerprints.
std::vector<Cluster> cluster_by_fingerprint(std::span<const ScoredCandidate> pool);

// Largest all-success cluster, else the largest cluster; abstains on an empty list.
SelectionResult select_semanticvote(std::span<const Cluster> clusters);

// Convenience: cluster + select. Abstains on an empty pool.
SelectionResult run_semanticvote(std::span<const ScoredCandidate> pool);

}  // namespace semvote
