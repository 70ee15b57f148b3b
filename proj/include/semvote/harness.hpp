#pragma once

// Benchmark loading, ground-truth scoring and the comparison reports built on top of
// per-problem selections.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semvote/aggregators.hpp"
#include "semvote/sandbox.hpp"
#include "semvote/selection.hpp"
#include "semvote/types.hpp"

namespace semvote::harness {

// JSON Lines {task_id, prompt, entry_point, example_inputs, ground_truth_tests}, sorted by
// task_id. Throws Error(kParse) naming the offending line.
std::vector<Problem> load_benchmark(const std::filesystem::path& path);

// Abstentions (nullopt) fail without execution.
sandbox::EvalVerdict evaluate_candidate(const Problem& problem, const std::optional<Candidate>& candidate,
                                        const sandbox::Sandbox& sandbox, double timeout_secs = 30.0);

// Everything known about one problem after sampling, execution and evaluation.
struct ProblemRun {
  Problem problem;
  std::vector<Candidate> pool;  // sampling order, invalid candidates included
  std::optional<Candidate> greedy;
  std::map<int, sandbox::EvalVerdict> verdicts;                // by candidate index; greedy is -1
  std::map<int, std::optional<std::string>> canon_keys;        // by candidate index
  std::map<InputStrategy, sandbox::ExecMatrix> matrices;       // over syntactically valid candidates

  std::vector<Candidate> survivors() const;
  // Fingerprints over the first `prefix` inputs of the strategy's matrix.
  std::vector<ScoredCandidate> scored(InputStrategy strategy, std::optional<std::size_t> prefix = std::nullopt) const;
  // Any pool candidate passes ground truth; unknown verdicts do not count as passing.
  bool oracle_pass() const;
};

struct SelectOptions {
  WvGrouping wv_grouping = WvGrouping::kFullFingerprint;
  std::optional<std::size_t> prefix;
};

// Methods needing a matrix abstain when the strategy has none for this problem.
SelectionResult select(const ProblemRun& run, Method method, InputStrategy strategy, const SelectOptions& options = {});

struct TrialOutcome {
  std::string task_id;
  Method method = Method::kSemanticVote;
  InputStrategy strategy = InputStrategy::kSketch;
  bool passed = false;
  std::optional<int> selected;
  bool oracle_pass = false;
  bool unknown = false;  // evaluation infrastructure failure; excluded from rates

  json to_json() const;
  static TrialOutcome from_json(const json& j);
};

// Greedy is scored against its own sample (its "pool" is the single greedy draw).
TrialOutcome score(const ProblemRun& run, const SelectionResult& selection, InputStrategy strategy);

// 100 * passed / counted, where unknown outcomes are not counted. 0 for no outcomes.
double pass_at_1(const std::vector<TrialOutcome>& outcomes);

struct GapRow {
  Method method = Method::kSemanticVote;
  std::size_t problems = 0;
  std::size_t passed = 0;
  std::size_t generation_failures = 0;
  std::size_t selection_failures = 0;
  double pass_pct = 0.0;
  double generation_failure_pct = 0.0;
  double selection_failure_pct = 0.0;
  std::vector<std::string> generation_failed;
  std::vector<std::string> selection_failed;
};

// Pass, generation failure and selection failure in hundredths of a percent. The first two are
// rounded as the pass-rate tables print them; the three always sum to 10000.
std::array<long long, 3> gap_hundredths(const GapRow& row);

// Outcomes of one method; generation failure = !oracle_pass, selection failure = oracle_pass && !passed.
GapRow oracle_gap(Method method, const std::vector<TrialOutcome>& outcomes);

struct ClusterSummary {
  std::size_t problems = 0;
  double mean_clusters = 0.0;
  double mean_largest = 0.0;
  std::map<std::size_t, std::size_t> clusters_histogram;  // cluster count -> problems
  std::map<std::size_t, std::size_t> largest_histogram;   // largest size -> problems
};

ClusterSummary cluster_diagnostics(const std::vector<std::vector<Cluster>>& clusterings);

struct ClusterShape {
  std::size_t clusters = 0;
  std::size_t largest = 0;
};
// Same summary from per-problem (cluster count, largest size); problems with no clusters are skipped.
ClusterSummary cluster_diagnostics(const std::vector<ClusterShape>& shapes);

struct SweepRow {
  std::size_t d = 0;
  double pass_pct = 0.0;
  ClusterSummary clusters;
};

// SemanticVote over input prefixes of the given strategy's matrix.
std::vector<SweepRow> d_scaling_sweep(const std::vector<ProblemRun>& runs, InputStrategy strategy,
                                      const std::vector<std::size_t>& d_values);

struct GridReport {
  std::vector<InputStrategy> strategies;
  std::vector<Method> methods;
  std::map<std::pair<InputStrategy, Method>, double> pass_pct;
  std::size_t problems = 0;  // restricted denominator
  std::size_t excluded = 0;  // problems missing inputs under some strategy
  double oracle_pct = 0.0;   // over the restricted subset
};

// Restricted to problems listed as available under every strategy; the oracle is computed on
// that subset only.
GridReport grid_from_outcomes(const std::vector<TrialOutcome>& outcomes, const std::vector<InputStrategy>& strategies,
                              const std::vector<Method>& methods,
                              const std::map<InputStrategy, std::set<std::string>>& available,
                              const std::map<std::string, bool>& oracle);

// Restricted to problems whose runs carry a matrix for every listed strategy.
GridReport ablation_grid(const std::vector<ProblemRun>& runs, const std::vector<InputStrategy>& strategies,
                         const std::vector<Method>& methods);

}  // namespace semvote::harness
