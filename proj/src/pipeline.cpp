#include "semvote/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "semvote/error.hpp"
#include "semvote/input_gen.hpp"
#include "semvote/prompts.hpp"
#include "semvote/stats.hpp"
#include "semvote/util.hpp"

namespace semvote::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.3.0";

bool uses_matrix(Method m) {
  return m == Method::kSemanticVote || m == Method::kMajority || m == Method::kWeighted || m == Method::kMbr;
}

json candidate_row(const std::string& task_id, const Candidate& c, const std::optional<std::string>& canon,
                   const std::string& error) {
  json j;
  j["task_id"] = task_id;
  j["index"] = c.index;
  j["valid"] = c.is_syntactically_valid;
  j["source"] = c.source;
  j["body_raw"] = c.body_raw;
  j["canon_key"] = canon ? json(*canon) : json(nullptr);
  j["error"] = error.empty() ? json(nullptr) : json(error);
  return j;
}

Candidate candidate_from_row(const json& row) {
  Candidate c;
  c.index = row.at("index").get<int>();
  c.source = row.at("source").get<std::string>();
  c.body_raw = row.at("body_raw").get<std::string>();
  c.is_syntactically_valid = row.at("valid").get<bool>();
  return c;
}

std::map<std::string, std::vector<json>> group_by_task(std::vector<json> rows) {
  std::map<std::string, std::vector<json>> out;
  for (auto& r : rows) out[r.at("task_id").get<std::string>()].push_back(std::move(r));
  return out;
}

json config_json(const Settings& s, const std::string& benchmark_hash) {
  json c;
  c["n_candidates"] = s.run.n_candidates;
  c["k_sketches"] = s.run.k_sketches;
  c["m_instantiations"] = s.run.m_instantiations;
  c["temperature"] = s.run.temperature;
  c["thinking_level"] = std::string(to_string(s.run.thinking_level));
  c["timeout_secs"] = s.run.timeout_secs;
  c["bootstrap_resamples"] = s.run.bootstrap_resamples;
  c["rng_seed"] = s.run.rng_seed;
  c["model"] = s.model_id;
  c["benchmark_sha256"] = benchmark_hash;
  return c;
}

// Candidate prompt's greedy draw: temperature 0, one sample.
llm::SamplingParams greedy_params(const RunConfig& run) {
  llm::SamplingParams p;
  p.temperature = 0.0;
  p.thinking_level = run.thinking_level;
  return p;
}

}  // namespace

void Settings::validate() const {
  run.validate();
  if (run_dir.empty()) throw Error(ErrorKind::kConfig, "--run-dir is required");
  if (workers < 1) throw Error(ErrorKind::kConfig, "--workers must be >= 1");
  if (strategies.empty()) throw Error(ErrorKind::kConfig, "at least one input strategy is required");
  if (methods.empty()) throw Error(ErrorKind::kConfig, "at least one method is required");
  if (!(eval_timeout_secs > 0)) throw Error(ErrorKind::kConfig, "evaluation timeout must be positive");
  for (auto d : d_values)
    if (d < 1) throw Error(ErrorKind::kConfig, "--d-values entries must be >= 1");
}

namespace files {
std::string inputs(InputStrategy s) { return fmt::format("inputs.{}.jsonl", to_string(s)); }
std::string matrix(InputStrategy s) { return fmt::format("matrix.{}.jsonl", to_string(s)); }
std::string sweep(InputStrategy s) { return fmt::format("sweep.{}.jsonl", to_string(s)); }
}  // namespace files

Pipeline::Pipeline(Settings settings) : settings_(std::move(settings)) {
  if (settings_.model_id.empty() && !settings_.fixture_dir.empty()) settings_.model_id = "fixture";
  settings_.validate();
}
Pipeline::~Pipeline() = default;

fs::path Pipeline::require(const std::string& name, const std::string& stage) const {
  auto path = dir() / name;
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kMissingArtifact,
                fmt::format("missing {}; run the '{}' stage on {} first", path.string(), stage, dir().string()));
  }
  return path;
}

const sandbox::Sandbox& Pipeline::sandbox() {
  if (!sandbox_) {
    fs::path script = settings_.runner;
    if (script.empty()) {
      if (const char* env = std::getenv("SEMVOTE_RUNNER")) script = env;
    }
    if (script.empty()) throw Error(ErrorKind::kConfig, "no runner script: pass --runner or set SEMVOTE_RUNNER");
    if (!fs::exists(script)) throw Error(ErrorKind::kConfig, "runner script not found: " + script.string());
    sandbox_ = std::make_unique<sandbox::Sandbox>(sandbox::RunnerSpec::python(script));
  }
  return *sandbox_;
}

llm::Gateway& Pipeline::gateway() {
  if (!gateway_) {
    std::shared_ptr<llm::ChatProvider> provider;
    if (!settings_.fixture_dir.empty()) {
      provider = llm::make_fixture_provider(settings_.fixture_dir);
    } else {
      if (settings_.model_id.empty()) throw Error(ErrorKind::kConfig, "--model is required for the HTTP provider");
      llm::ProviderConfig cfg;
      cfg.base_url = settings_.provider_url;
      cfg.model_id = settings_.model_id;
      cfg.api_key_env = settings_.api_key_env;
      provider = llm::make_http_provider(cfg);
    }
    std::optional<llm::ResponseCache> cache;
    if (!settings_.cache_dir.empty()) cache.emplace(settings_.cache_dir);
    gateway_ = std::make_unique<llm::Gateway>(std::move(provider), std::move(cache), settings_.model_id, 4,
                                              std::chrono::milliseconds(500), settings_.workers);
  }
  return *gateway_;
}

std::vector<Problem> Pipeline::problems() {
  if (!problems_) {
    fs::path path = settings_.benchmark;
    auto manifest_path = dir() / files::kManifest;
    json manifest;
    if (fs::exists(manifest_path)) {
      manifest = json::parse(read_file(manifest_path));
      if (path.empty()) path = manifest.at("benchmark").at("path").get<std::string>();
    }
    if (path.empty()) throw Error(ErrorKind::kConfig, "--benchmark is required");
    if (!fs::exists(path)) throw Error(ErrorKind::kMissingArtifact, "benchmark not found: " + path.string());
    if (!manifest.is_null()) {
      auto recorded = manifest.at("benchmark").at("sha256").get<std::string>();
      if (sha256_hex(read_file(path)) != recorded) {
        throw Error(ErrorKind::kConfig, "benchmark " + path.string() + " changed since the run was created");
      }
    }
    settings_.benchmark = path;
    problems_ = harness::load_benchmark(path);
  }
  return *problems_;
}

void Pipeline::ensure_manifest() {
  auto path = dir() / files::kManifest;
  auto probs = problems();
  const std::string hash = sha256_hex(read_file(settings_.benchmark));
  auto config = config_json(settings_, hash);
  if (fs::exists(path)) {
    auto manifest = json::parse(read_file(path));
    if (manifest.at("config") != config) {
      throw Error(ErrorKind::kConfig, fmt::format("{} was created with a different configuration:\n  recorded {}\n  given    {}",
                                                  dir().string(), manifest["config"].dump(), config.dump()));
    }
    return;
  }
  json m;
  m["tool_version"] = kToolVersion;
  m["created_at"] = utc_timestamp();
  m["config"] = config;
  m["benchmark"] = {{"path", fs::absolute(settings_.benchmark).lexically_normal().string()},
                    {"sha256", hash},
                    {"problems", probs.size()}};
  m["provider"] = settings_.fixture_dir.empty() ? "http:" + settings_.provider_url
                                                : "fixture:" + settings_.fixture_dir.string();
  m["runner"] = {{"script", settings_.runner.string()}, {"interpreter", sandbox().interpreter_version()}};
  m["stages"] = json::object();
  fs::create_directories(dir());
  write_file_atomic(path, m.dump(2) + "\n");
}

void Pipeline::mark_stage(const std::string& stage) {
  auto path = dir() / files::kManifest;
  auto m = json::parse(read_file(path));
  if (m["stages"].contains(stage)) return;
  m["stages"][stage] = utc_timestamp();
  write_file_atomic(path, m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

void Pipeline::generate() {
  ensure_manifest();
  const auto probs = problems();
  const auto& sb = sandbox();
  auto& gw = gateway();
  llm::SamplingParams params;
  params.temperature = settings_.run.temperature;
  params.thinking_level = settings_.run.thinking_level;

  std::vector<json> rows, greedy_rows;
  for (const auto& p : probs) {
    auto samples = llm::sample_candidates(p, settings_.run.n_candidates, params, gw);
    std::vector<json> problem_rows(samples.size());
    parallel_for(samples.size(), settings_.workers, [&](std::size_t i) {
      const auto& s = samples[i];
      Candidate c;
      c.index = static_cast<int>(i);
      std::optional<std::string> canon;
      if (s.text) {
        c = sandbox::assemble_source(p, *s.text, static_cast<int>(i), sb);
        if (c.is_syntactically_valid) canon = sb.canonical_ast_key(c.source);
      }
      problem_rows[i] = candidate_row(p.task_id, c, canon, s.error);
    });
    std::size_t failed = std::count_if(samples.begin(), samples.end(), [](const auto& s) { return !s.text; });
    if (failed) spdlog::warn("{}: {} of {} samples failed at the provider", p.task_id, failed, samples.size());
    rows.insert(rows.end(), problem_rows.begin(), problem_rows.end());

    Candidate g;
    g.index = -1;
    std::string error;
    try {
      auto text = gw.complete(prompts::candidate_prompt(p.prompt), greedy_params(settings_.run), 0);
      g = sandbox::assemble_source(p, text, -1, sb);
    } catch (const Error& e) {
      spdlog::warn("{}: greedy sample failed: {}", p.task_id, e.what());
      error = e.what();
    }
    greedy_rows.push_back(candidate_row(p.task_id, g, std::nullopt, error));
  }
  write_jsonl_atomic(dir() / files::kCandidates, rows);
  write_jsonl_atomic(dir() / files::kGreedy, greedy_rows);
  spdlog::info("generate: {} problems, {} candidates ({} network calls, {} retries)", probs.size(), rows.size(),
               gw.network_calls(), gw.retries());
  mark_stage("generate");
}

void Pipeline::inputs() {
  ensure_manifest();
  require(files::kCandidates, "generate");
  const auto probs = problems();
  const auto& sb = sandbox();
  inputs::ExprValidator valid = [&](const std::string& expr) {
    return sb.check_syntax("__probe__ = (" + expr + "\n)\n");
  };
  inputs::GenOptions opts;
  opts.params.temperature = settings_.run.temperature;
  opts.params.thinking_level = settings_.run.thinking_level;
  const std::size_t d = settings_.run.d_inputs();

  for (auto strategy : settings_.strategies) {
    std::vector<json> rows;
    std::size_t failures = 0;
    for (const auto& p : probs) {
      InputSet set;
      try {
        switch (strategy) {
          case InputStrategy::kSketch:
            set = inputs::gen_sketch_inputs(p, settings_.run.k_sketches, settings_.run.m_instantiations, gateway(),
                                            valid, opts);
            break;
          case InputStrategy::kDirect: set = inputs::gen_direct_inputs(p, d, gateway(), valid, opts); break;
          case InputStrategy::kRandom: set = inputs::gen_random_inputs(p, d, settings_.run.rng_seed); break;
          case InputStrategy::kExample: {
            auto all = inputs::extract_example_inputs(p);
            set.strategy = InputStrategy::kExample;
            for (auto& in : all.inputs)
              if (valid(in.expr)) {
                in.index = set.inputs.size();
                set.inputs.push_back(std::move(in));
              }
            break;
          }
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInputGeneration) throw;
        spdlog::warn("{}", e.what());
      }
      if (set.inputs.empty()) {
        ++failures;
        spdlog::warn("{}: no {} inputs; the problem is excluded from this strategy", p.task_id, to_string(strategy));
        continue;
      }
      auto r = inputs::to_rows(p.task_id, set);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    write_jsonl_atomic(dir() / files::inputs(strategy), rows);
    spdlog::info("inputs[{}]: {} rows, {} problems without inputs", to_string(strategy), rows.size(), failures);
    mark_stage("inputs." + std::string(to_string(strategy)));
  }
}

void Pipeline::execute() {
  ensure_manifest();
  const auto probs = problems();
  auto candidates = group_by_task(read_jsonl(require(files::kCandidates, "generate")));
  for (auto strategy : settings_.strategies) {
    auto inputs_by_task = group_by_task(read_jsonl(require(files::inputs(strategy), "inputs")));
    const auto final_path = dir() / files::matrix(strategy);
    const auto journal = dir() / (files::matrix(strategy) + ".journal");
    if (fs::exists(final_path) && !fs::exists(journal)) fs::copy_file(final_path, journal);

    std::vector<json> rows;
    for (const auto& p : probs) {
      auto it = inputs_by_task.find(p.task_id);
      if (it == inputs_by_task.end()) continue;
      auto set = inputs::from_rows(it->second);
      std::vector<Candidate> survivors;
      for (const auto& row : candidates[p.task_id]) {
        auto c = candidate_from_row(row);
        if (c.is_syntactically_valid) survivors.push_back(std::move(c));
      }
      auto m = sandbox::run_matrix(p, survivors, set, sandbox(),
                                   {settings_.run.timeout_secs, settings_.workers, journal});
      auto r = m.to_rows();
      rows.insert(rows.end(), r.begin(), r.end());
    }
    write_jsonl_atomic(final_path, rows);
    fs::remove(journal);
    spdlog::info("execute[{}]: {} cells", to_string(strategy), rows.size());
    mark_stage("execute." + std::string(to_string(strategy)));
  }
}

std::vector<harness::ProblemRun> Pipeline::load_runs(const std::vector<Problem>& probs,
                                                     const std::vector<InputStrategy>& strategies, bool with_evals) {
  auto candidates = group_by_task(read_jsonl(require(files::kCandidates, "generate")));
  auto greedy = group_by_task(read_jsonl(require(files::kGreedy, "generate")));
  std::map<InputStrategy, std::map<std::string, std::vector<json>>> inputs, matrices;
  for (auto s : strategies) {
    inputs[s] = group_by_task(read_jsonl(require(files::inputs(s), "inputs")));
    matrices[s] = group_by_task(read_jsonl(require(files::matrix(s), "execute")));
  }
  std::map<std::string, std::vector<json>> evals;
  if (with_evals) evals = group_by_task(read_jsonl(require(files::kEvals, "evaluate")));

  std::vector<harness::ProblemRun> runs;
  for (const auto& p : probs) {
    harness::ProblemRun run;
    run.problem = p;
    std::vector<int> survivors;
    for (const auto& row : candidates[p.task_id]) {
      run.pool.push_back(candidate_from_row(row));
      if (run.pool.back().is_syntactically_valid) survivors.push_back(run.pool.back().index);
      if (!row.at("canon_key").is_null()) run.canon_keys[run.pool.back().index] = row["canon_key"].get<std::string>();
    }
    if (auto g = greedy.find(p.task_id); g != greedy.end() && !g->second.empty()) {
      run.greedy = candidate_from_row(g->second.front());
    }
    for (auto s : strategies) {
      auto in = inputs[s].find(p.task_id);
      if (in == inputs[s].end()) continue;
      sandbox::ExecMatrix m(p.task_id, survivors, in->second.size());
      for (const auto& cell : matrices[s][p.task_id]) {
        m.set(cell.at("cand").get<int>(), cell.at("input").get<std::size_t>(),
              {parse_status(cell.at("status").get<std::string>()), cell.at("payload").get<std::string>()});
      }
      if (!m.complete()) {
        throw Error(ErrorKind::kMissingArtifact, fmt::format("{} is incomplete for {}; rerun the 'execute' stage",
                                                             files::matrix(s), p.task_id));
      }
      run.matrices.emplace(s, std::move(m));
    }
    for (const auto& row : evals[p.task_id]) {
      auto v = row.at("verdict").get<std::string>();
      run.verdicts[row.at("cand").get<int>()] = v == "pass"   ? sandbox::EvalVerdict::kPass
                                                : v == "fail" ? sandbox::EvalVerdict::kFail
                                                              : sandbox::EvalVerdict::kUnknown;
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

void Pipeline::select() {
  ensure_manifest();
  const auto probs = problems();
  bool needs_matrix = std::any_of(settings_.methods.begin(), settings_.methods.end(), uses_matrix);
  std::vector<InputStrategy> loaded = needs_matrix ? settings_.strategies : std::vector<InputStrategy>{};
  auto runs = load_runs(probs, loaded, false);
  std::vector<json> rows;
  for (auto strategy : settings_.strategies) {
    for (const auto& run : runs) {
      for (auto method : settings_.methods) {
        auto sel = harness::select(run, method, strategy);
        json j;
        j["task_id"] = run.problem.task_id;
        j["strategy"] = std::string(to_string(strategy));
        j["method"] = std::string(to_string(method));
        j["selected"] = sel.selected ? json(*sel.selected) : json(nullptr);
        j["cluster_count"] = sel.cluster_count;
        j["largest_cluster"] = sel.largest_cluster;
        rows.push_back(std::move(j));
      }
    }
  }
  write_jsonl_atomic(dir() / files::kSelections, rows);
  spdlog::info("select: {} selections", rows.size());
  mark_stage("select");
}

void Pipeline::evaluate() {
  ensure_manifest();
  const auto probs = problems();
  auto selections = read_jsonl(require(files::kSelections, "select"));
  auto runs = load_runs(probs, {}, false);

  std::map<std::pair<std::string, int>, std::string> known;
  if (fs::exists(dir() / files::kEvals)) {
    for (const auto& row : read_jsonl(dir() / files::kEvals)) {
      auto v = row.at("verdict").get<std::string>();
      if (v != "unknown") known[{row.at("task_id").get<std::string>(), row.at("cand").get<int>()}] = v;
    }
  }

  struct Job {
    const harness::ProblemRun* run;
    Candidate cand;
  };
  std::vector<Job> jobs;
  for (const auto& run : runs) {
    for (const auto& c : run.pool) jobs.push_back({&run, c});
    if (run.greedy) jobs.push_back({&run, *run.greedy});
  }
  std::vector<std::string> verdicts(jobs.size());
  const auto& sb = sandbox();
  parallel_for(jobs.size(), settings_.workers, [&](std::size_t i) {
    const auto& [run, cand] = jobs[i];
    auto hit = known.find({run->problem.task_id, cand.index});
    if (hit != known.end()) {
      verdicts[i] = hit->second;
    } else if (!cand.is_syntactically_valid) {
      verdicts[i] = "fail";
    } else {
      verdicts[i] = std::string(to_string(harness::evaluate_candidate(run->problem, cand, sb, settings_.eval_timeout_secs)));
    }
  });
  std::vector<json> eval_rows;
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json j;
    j["task_id"] = jobs[i].run->problem.task_id;
    j["cand"] = jobs[i].cand.index;
    j["verdict"] = verdicts[i];
    unknown += verdicts[i] == "unknown";
    eval_rows.push_back(std::move(j));
  }
  if (unknown) {
    spdlog::error("{} ground-truth evaluations failed in the sandbox; they are excluded from pass rates", unknown);
  }
  write_jsonl_atomic(dir() / files::kEvals, eval_rows);

  runs = load_runs(probs, {}, true);
  std::map<std::string, const harness::ProblemRun*> by_task;
  for (const auto& r : runs) by_task[r.problem.task_id] = &r;
  std::vector<json> outcome_rows;
  for (const auto& row : selections) {
    const auto* run = by_task.at(row.at("task_id").get<std::string>());
    SelectionResult sel;
    sel.method = parse_method(row.at("method").get<std::string>());
    if (!row.at("selected").is_null()) sel.selected = row["selected"].get<int>();
    auto o = harness::score(*run, sel, parse_strategy(row.at("strategy").get<std::string>()));
    outcome_rows.push_back(o.to_json());
  }
  write_jsonl_atomic(dir() / files::kOutcomes, outcome_rows);
  spdlog::info("evaluate: {} verdicts, {} outcomes", eval_rows.size(), outcome_rows.size());
  mark_stage("evaluate");
}

void Pipeline::sweep() {
  ensure_manifest();
  const auto probs = problems();
  auto strategy = settings_.strategies.front();
  auto runs = load_runs(probs, {strategy}, true);
  std::size_t max_d = 0;
  for (const auto& r : runs)
    if (auto it = r.matrices.find(strategy); it != r.matrices.end()) max_d = std::max(max_d, it->second.d());
  std::vector<std::size_t> ds;
  for (auto d : settings_.d_values) {
    if (d > max_d) {
      spdlog::warn("sweep: d={} exceeds the {} inputs available; skipped", d, max_d);
      continue;
    }
    ds.push_back(d);
  }
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::vector<json> rows;
  for (const auto& row : harness::d_scaling_sweep(runs, strategy, ds)) {
    json j;
    j["strategy"] = std::string(to_string(strategy));
    j["d"] = row.d;
    j["problems"] = row.clusters.problems;
    j["pass_pct"] = row.pass_pct;
    j["mean_clusters"] = row.clusters.mean_clusters;
    j["mean_largest"] = row.clusters.mean_largest;
    rows.push_back(std::move(j));
  }
  write_jsonl_atomic(dir() / files::sweep(strategy), rows);
  mark_stage("sweep." + std::string(to_string(strategy)));
}

void Pipeline::bootstrap() {
  ensure_manifest();
  auto strategy = settings_.strategies.front();
  std::map<std::string, harness::TrialOutcome> a, b;
  for (const auto& row : read_jsonl(require(files::kOutcomes, "evaluate"))) {
    auto o = harness::TrialOutcome::from_json(row);
    if (o.strategy != strategy) continue;
    if (o.method == settings_.bootstrap_a) a[o.task_id] = o;
    if (o.method == settings_.bootstrap_b) b[o.task_id] = o;
  }
  stats::PairedSample sample;
  std::vector<harness::TrialOutcome> oa, ob;
  for (const auto& [task, x] : a) {
    auto y = b.find(task);
    if (y == b.end() || x.unknown || y->second.unknown) continue;
    sample.a.push_back(x.passed);
    sample.b.push_back(y->second.passed);
    oa.push_back(x);
    ob.push_back(y->second);
  }
  if (sample.a.empty()) {
    throw Error(ErrorKind::kMissingArtifact, fmt::format("no paired outcomes for {} vs {} under {}; run 'select' with both methods",
                                                         to_string(settings_.bootstrap_a), to_string(settings_.bootstrap_b),
                                                         to_string(strategy)));
  }
  auto rep = stats::paired_bootstrap(sample, settings_.run.bootstrap_resamples, settings_.run.rng_seed);
  json j;
  j["strategy"] = std::string(to_string(strategy));
  j["a"] = std::string(to_string(settings_.bootstrap_a));
  j["b"] = std::string(to_string(settings_.bootstrap_b));
  j["pass_a"] = harness::pass_at_1(oa);
  j["pass_b"] = harness::pass_at_1(ob);
  j["report"] = json::parse(rep.to_json());

  std::vector<json> rows;
  const auto path = dir() / files::kBootstrap;
  if (fs::exists(path)) {
    for (auto& r : read_jsonl(path))
      if (!(r["strategy"] == j["strategy"] && r["a"] == j["a"] && r["b"] == j["b"])) rows.push_back(std::move(r));
  }
  rows.push_back(std::move(j));
  std::sort(rows.begin(), rows.end(), [](const json& x, const json& y) {
    return std::tie(x["strategy"].get_ref<const std::string&>(), x["a"].get_ref<const std::string&>(),
                    x["b"].get_ref<const std::string&>()) <
           std::tie(y["strategy"].get_ref<const std::string&>(), y["a"].get_ref<const std::string&>(),
                    y["b"].get_ref<const std::string&>());
  });
  write_jsonl_atomic(path, rows);
  mark_stage("bootstrap");
}

void Pipeline::report() {
  render_reports(dir());
  if (fs::exists(dir() / files::kManifest)) mark_stage("report");
}

void Pipeline::run_all() {
  generate();
  inputs();
  execute();
  select();
  evaluate();
  sweep();
  bootstrap();
  report();
}

}  // namespace semvote::pipeline
