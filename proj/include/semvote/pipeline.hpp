#pragma once

// Pipeline stages over a run directory. Every stage reads its inputs from the directory,
// writes its artifact atomically, and is idempotent given unchanged upstream artifacts.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semvote/harness.hpp"
#include "semvote/llm_gateway.hpp"
#include "semvote/sandbox.hpp"
#include "semvote/types.hpp"

namespace semvote::pipeline {

struct Settings {
  RunConfig run;
  std::filesystem::path run_dir;
  std::filesystem::path benchmark;
  std::string model_id;
  std::string provider_url = "https://api.openai.com/v1";
  std::string api_key_env = "SEMVOTE_API_KEY";
  std::filesystem::path fixture_dir;  // offline provider when non-empty
  std::filesystem::path cache_dir;    // response cache; empty disables it
  std::filesystem::path runner;       // runner script
  std::size_t workers = 4;
  std::vector<InputStrategy> strategies = {InputStrategy::kSketch};
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<std::size_t> d_values = {5, 10, 20, 30, 50};
  double eval_timeout_secs = 30.0;
  Method bootstrap_a = Method::kSemanticVote;
  Method bootstrap_b = Method::kWeighted;

  // Throws Error(kConfig).
  void validate() const;
};

namespace files {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kCandidates = "candidates.jsonl";
inline constexpr const char* kGreedy = "greedy.jsonl";
inline constexpr const char* kSelections = "selections.jsonl";
inline constexpr const char* kEvals = "evals.jsonl";
inline constexpr const char* kOutcomes = "outcomes.jsonl";
inline constexpr const char* kBootstrap = "bootstrap.jsonl";
inline constexpr const char* kReports = "reports";
std::string inputs(InputStrategy s);
std::string matrix(InputStrategy s);
std::string sweep(InputStrategy s);
}  // namespace files

class Pipeline {
 public:
  explicit Pipeline(Settings settings);
  ~Pipeline();

  void generate();
  void inputs();
  void execute();
  void select();
  void evaluate();
  void sweep();
  void bootstrap();
  void report();
  // generate through report for every configured strategy.
  void run_all();

  const Settings& settings() const { return settings_; }

 private:
  const std::filesystem::path& dir() const { return settings_.run_dir; }
  std::filesystem::path require(const std::string& name, const std::string& stage) const;
  void ensure_manifest();
  void mark_stage(const std::string& stage);
  std::vector<Problem> problems();
  const sandbox::Sandbox& sandbox();
  llm::Gateway& gateway();
  std::vector<harness::ProblemRun> load_runs(const std::vector<Problem>& problems,
                                             const std::vector<InputStrategy>& strategies, bool with_evals);

  Settings settings_;
  std::unique_ptr<sandbox::Sandbox> sandbox_;
  std::unique_ptr<llm::Gateway> gateway_;
  std::optional<std::vector<Problem>> problems_;
};

// Renders reports/ from the run directory alone: no network, no execution.
void render_reports(const std::filesystem::path& run_dir);

}  // namespace semvote::pipeline
