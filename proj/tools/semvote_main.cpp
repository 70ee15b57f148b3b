// semvote: command-line driver for the selection pipeline.

#include <cstdlib>
#include <iostream>
#include <map>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "semvote/error.hpp"
#include "semvote/pipeline.hpp"

using namespace semvote;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& names, Parse parse) {
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execution-based program selection: sampling, input generation, sandboxed execution, voting, evaluation."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value file; keys are flag names without dashes, flags win");

  pipeline::Settings s;
  std::string thinking = "low";
  std::vector<std::string> strategies = {"sketch"};
  std::vector<std::string> methods;
  for (auto m : kAllMethods) methods.emplace_back(to_string(m));
  std::string bootstrap_a = "semanticvote", bootstrap_b = "weighted";
  std::string log_level = "info";

  app.add_option("--run-dir", s.run_dir, "Run directory (runs/<name>)");
  app.add_option("--benchmark", s.benchmark, "Benchmark JSON Lines file");
  app.add_option("--model", s.model_id, "Model identifier");
  app.add_option("--thinking", thinking, "Thinking level")->check(CLI::IsMember({"low", "medium", "high"}));
  app.add_option("--n", s.run.n_candidates, "Candidates per problem")->capture_default_str();
  app.add_option("--k", s.run.k_sketches, "Input sketches per problem")->capture_default_str();
  app.add_option("--m", s.run.m_instantiations, "Concrete inputs per sketch")->capture_default_str();
  app.add_option("--temperature", s.run.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--timeout-secs", s.run.timeout_secs, "Wall-clock limit per execution")->capture_default_str();
  app.add_option("--eval-timeout-secs", s.eval_timeout_secs, "Wall-clock limit per ground-truth evaluation")
      ->capture_default_str();
  app.add_option("--resamples", s.run.bootstrap_resamples, "Bootstrap resamples")->capture_default_str();
  app.add_option("--seed", s.run.rng_seed, "Seed for random inputs and the bootstrap")->capture_default_str();
  app.add_option("--workers", s.workers, "Parallel sandbox workers and provider requests")->capture_default_str();
  app.add_option("--strategy", strategies, "Input strategies: sketch,direct,random,example")
      ->delimiter(',')
      ->check(CLI::IsMember({"sketch", "direct", "random", "example"}));
  app.add_option("--methods", methods, "Selection methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"semanticvote", "majority", "ast_majority", "weighted", "mbr", "best_of_n", "greedy"}));
  app.add_option("--d-values", s.d_values, "Input budgets for the sweep")->delimiter(',');
  app.add_option("--bootstrap-a", bootstrap_a, "First method of the bootstrap pair");
  app.add_option("--bootstrap-b", bootstrap_b, "Second method of the bootstrap pair");
  app.add_option("--provider-url", s.provider_url, "Chat-completions base URL")->capture_default_str();
  app.add_option("--api-key-env", s.api_key_env, "Environment variable holding the provider key")->capture_default_str();
  app.add_option("--fixture-dir", s.fixture_dir, "Serve responses from a fixture directory instead of a provider");
  app.add_option("--cache-dir", s.cache_dir, "Response cache directory");
  app.add_option("--runner", s.runner, "Runner script (default: $SEMVOTE_RUNNER)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  const std::map<std::string, std::string> stages = {
      {"generate", "Sample N candidates and the greedy draw per problem"},
      {"inputs", "Generate probe inputs for each strategy"},
      {"execute", "Run every valid candidate on every input"},
      {"select", "Apply the selection methods"},
      {"evaluate", "Score selections and the pool against ground truth"},
      {"sweep", "SemanticVote over input-budget prefixes"},
      {"bootstrap", "Paired bootstrap between two methods"},
      {"report", "Render markdown and CSV reports from the run directory"},
      {"run", "All stages in order"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    s.run.thinking_level = parse_thinking_level(thinking);
    s.strategies = parse_list<InputStrategy>(strategies, parse_strategy);
    s.methods = parse_list<Method>(methods, parse_method);
    s.bootstrap_a = parse_method(bootstrap_a);
    s.bootstrap_b = parse_method(bootstrap_b);
    if (stage == "report") {
      // Pure over the run directory; needs neither a provider nor a runner.
      if (s.run_dir.empty()) throw Error(ErrorKind::kConfig, "--run-dir is required");
      pipeline::render_reports(s.run_dir);
      return kExitOk;
    }
    pipeline::Pipeline p(s);
    if (stage == "generate") p.generate();
    else if (stage == "inputs") p.inputs();
    else if (stage == "execute") p.execute();
    else if (stage == "select") p.select();
    else if (stage == "evaluate") p.evaluate();
    else if (stage == "sweep") p.sweep();
    else if (stage == "bootstrap") p.bootstrap();
    else p.run_all();
  } catch (const Error& e) {
    spdlog::error("{}: {}", stage, e.what());
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", stage, e.what());
    return kExitStage;
  }
  return kExitOk;
}
