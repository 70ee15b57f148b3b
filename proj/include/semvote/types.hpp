#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semvote {

enum class ThinkingLevel { kLow, kMedium, kHigh };
enum class InputStrategy { kSketch, kDirect, kRandom, kExample };
enum class ExecStatus { kOk, kErr, kTimeout };
enum class Method { kSemanticVote, kMajority, kAstMajority, kWeighted, kMbr, kBestOfN, kGreedy };

std::string_view to_string(ThinkingLevel v);
std::string_view to_string(InputStrategy v);
std::string_view to_string(ExecStatus v);
std::string_view to_string(Method v);

// Throw Error(kConfig) on unknown names.
ThinkingLevel parse_thinking_level(std::string_view s);
InputStrategy parse_strategy(std::string_view s);
ExecStatus parse_status(std::string_view s);
Method parse_method(std::string_view s);

inline constexpr Method kAllMethods[] = {Method::kGreedy,   Method::kBestOfN, Method::kMajority,
                                         Method::kAstMajority, Method::kWeighted, Method::kMbr,
                                         Method::kSemanticVote};
inline constexpr InputStrategy kAllStrategies[] = {InputStrategy::kSketch, InputStrategy::kDirect,
                                                   InputStrategy::kRandom, InputStrategy::kExample};

struct RunConfig {
  std::size_t n_candidates = 50;
  std::size_t k_sketches = 10;
  std::size_t m_instantiations = 5;
  double temperature = 0.8;
  ThinkingLevel thinking_level = ThinkingLevel::kLow;
  double timeout_secs = 5.0;
  std::size_t bootstrap_resamples = 10000;
  std::uint64_t rng_seed = 0;

  std::size_t d_inputs() const { return k_sketches * m_instantiations; }
  // Throws Error(kConfig) when an invariant does not hold.
  void validate() const;
};

struct Problem {
  std::string task_id;
  std::string prompt;
  std::string entry_point;
  std::vector<std::string> example_inputs;
  std::string ground_truth_tests;
};

struct Candidate {
  int index = 0;
  std::string source;
  std::string body_raw;
  bool is_syntactically_valid = false;

  std::size_t char_length() const { return source.size(); }
};

struct TestInput {
  std::size_t index = 0;
  std::string expr;
  std::optional<std::size_t> sketch_id;
  std::string sketch_description;
  InputStrategy strategy = InputStrategy::kSketch;
};

struct InputSet {
  InputStrategy strategy = InputStrategy::kSketch;
  std::vector<TestInput> inputs;

  std::size_t size() const { return inputs.size(); }
};

struct ExecRecord {
  ExecStatus status = ExecStatus::kOk;
  std::string payload;

  static ExecRecord ok(std::string value) { return {ExecStatus::kOk, std::move(value)}; }
  static ExecRecord err(std::string cls) { return {ExecStatus::kErr, std::move(cls)}; }
  static ExecRecord timeout() { return {ExecStatus::kTimeout, "TimeoutError"}; }

  friend bool operator==(const ExecRecord&, const ExecRecord&) = default;
  friend auto operator<=>(const ExecRecord&, const ExecRecord&) = default;
};

struct Fingerprint {
  std::vector<ExecRecord> entries;
  bool all_success = false;

  std::size_t size() const { return entries.size(); }
  friend bool operator==(const Fingerprint& a, const Fingerprint& b) { return a.entries == b.entries; }
};

// A candidate paired with its fingerprint; the unit every execution-based aggregator consumes.
struct ScoredCandidate {
  Candidate candidate;
  Fingerprint fingerprint;
};

struct Cluster {
  Fingerprint fingerprint;
  std::vector<int> members;
  int representative = 0;
  std::string representative_source;

  std::size_t size() const { return members.size(); }
};

struct CandidateScore {
  int candidate = 0;
  double score = 0.0;
};

struct SelectionResult {
  Method method = Method::kSemanticVote;
  std::optional<int> selected;
  std::size_t cluster_count = 0;
  std::size_t largest_cluster = 0;
  std::vector<CandidateScore> scores;

  bool abstained() const { return !selected.has_value(); }
};

}  // namespace semvote
