#pragma once

// Baseline selection rules sharing SemanticVote's pool and execution records.
// All rules except best-of-N and greedy break ties on source text only, so they
// are invariant under candidate reordering.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semvote/types.hpp"

namespace semvote {

// Per-input payloads joined by an unprintable separator. Defined only for all-success fingerprints.
std::string output_pattern_key(const Fingerprint& fp);

// Output-pattern majority vote: candidates with any non-ok record are discarded.
SelectionResult select_majority_vote(std::span<const ScoredCandidate> pool);

// canon_keys is index-aligned with pool; nullopt marks an unparseable candidate.
SelectionResult select_ast_majority(std::span<const Candidate> pool,
                                    std::span<const std::optional<std::string>> canon_keys);

enum class WvGrouping {
  kFullFingerprint,  // errored candidates vote with weight ok/D
  kAllSuccessOnly,   // errored candidates are dropped
};

double success_rate(const Fingerprint& fp);

SelectionResult select_weighted_vote(std::span<const ScoredCandidate> pool,
                                     WvGrouping grouping = WvGrouping::kFullFingerprint);

// Per-candidate agreement counts, index-aligned with pool.
std::vector<std::int64_t> mbr_scores(std::span<const ScoredCandidate> pool);
SelectionResult select_mbr_exec(std::span<const ScoredCandidate> pool);

// pool must be in sampling order.
SelectionResult select_best_of_n(std::span<const Candidate> pool);
SelectionResult select_greedy(const std::optional<Candidate>& greedy);

}  // namespace semvote
