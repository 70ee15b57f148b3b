#include "semvote/harness.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "semvote/error.hpp"

namespace semvote::harness {

std::vector<Problem> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingArtifact, "benchmark not found: " + path.string());
  std::vector<Problem> problems;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto where = path.string() + ":" + std::to_string(lineno);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    auto text_field = [&](const char* name, bool required) -> std::string {
      if (!row.contains(name)) {
        if (required) throw Error(ErrorKind::kParse, where + ": missing field '" + name + "'");
        return {};
      }
      if (!row[name].is_string()) throw Error(ErrorKind::kParse, where + ": field '" + name + "' must be a string");
      return row[name].get<std::string>();
    };
    Problem p;
    p.task_id = text_field("task_id", true);
    p.prompt = text_field("prompt", true);
    p.entry_point = text_field("entry_point", true);
    p.ground_truth_tests = text_field("ground_truth_tests", false);
    if (p.task_id.empty()) throw Error(ErrorKind::kParse, where + ": empty task_id");
    if (p.entry_point.empty()) throw Error(ErrorKind::kParse, where + ": empty entry_point");
    if (row.contains("example_inputs")) {
      if (!row["example_inputs"].is_array()) throw Error(ErrorKind::kParse, where + ": example_inputs must be a list");
      for (const auto& e : row["example_inputs"]) p.example_inputs.push_back(e.get<std::string>());
    }
    if (!seen.insert(p.task_id).second) throw Error(ErrorKind::kParse, where + ": duplicate task_id " + p.task_id);
    problems.push_back(std::move(p));
  }
  std::sort(problems.begin(), problems.end(), [](const Problem& a, const Problem& b) { return a.task_id < b.task_id; });
  return problems;
}

sandbox::EvalVerdict evaluate_candidate(const Problem& problem, const std::optional<Candidate>& candidate,
                                        const sandbox::Sandbox& sandbox, double timeout_secs) {
  if (!candidate) return sandbox::EvalVerdict::kFail;
  return sandbox.eval_tests(candidate->source, problem.entry_point, problem.ground_truth_tests, timeout_secs);
}

std::vector<Candidate> ProblemRun::survivors() const {
  std::vector<Candidate> out;
  std::copy_if(pool.begin(), pool.end(), std::back_inserter(out), [](const Candidate& c) { return c.is_syntactically_valid; });
  return out;
}

std::vector<ScoredCandidate> ProblemRun::scored(InputStrategy strategy, std::optional<std::size_t> prefix) const {
  std::vector<ScoredCandidate> out;
  auto it = matrices.find(strategy);
  if (it == matrices.end()) return out;
  const auto& m = it->second;
  const std::size_t d = prefix ? std::min(*prefix, m.d()) : m.d();
  for (const auto& c : survivors()) out.push_back({c, make_fingerprint(m.row(c.index, d), d)});
  return out;
}

bool ProblemRun::oracle_pass() const {
  for (const auto& c : pool) {
    auto v = verdicts.find(c.index);
    if (v != verdicts.end() && v->second == sandbox::EvalVerdict::kPass) return true;
  }
  return false;
}

SelectionResult select(const ProblemRun& run, Method method, InputStrategy strategy, const SelectOptions& options) {
  switch (method) {
    case Method::kGreedy: return select_greedy(run.greedy);
    case Method::kBestOfN: return select_best_of_n(run.pool);
    case Method::kAstMajority: {
      auto survivors = run.survivors();
      std::vector<std::optional<std::string>> keys;
      for (const auto& c : survivors) {
        auto k = run.canon_keys.find(c.index);
        keys.push_back(k == run.canon_keys.end() ? std::nullopt : k->second);
      }
      return select_ast_majority(survivors, keys);
    }
    default: break;
  }
  auto pool = run.scored(strategy, options.prefix);
  bool has_matrix = run.matrices.count(strategy) > 0;
  if (!has_matrix || pool.empty() || (pool.front().fingerprint.size() == 0)) {
    SelectionResult none;
    none.method = method;
    return none;
  }
  switch (method) {
    case Method::kSemanticVote: return run_semanticvote(pool);
    case Method::kMajority: return select_majority_vote(pool);
    case Method::kWeighted: return select_weighted_vote(pool, options.wv_grouping);
    case Method::kMbr: return select_mbr_exec(pool);
    default: break;
  }
  return {};
}

json TrialOutcome::to_json() const {
  json j;
  j["task_id"] = task_id;
  j["method"] = std::string(to_string(method));
  j["strategy"] = std::string(to_string(strategy));
  j["passed"] = passed;
  j["selected"] = selected ? json(*selected) : json(nullptr);
  j["oracle_pass"] = oracle_pass;
  j["unknown"] = unknown;
  return j;
}

TrialOutcome TrialOutcome::from_json(const json& j) {
  TrialOutcome o;
  o.task_id = j.at("task_id").get<std::string>();
  o.method = parse_method(j.at("method").get<std::string>());
  o.strategy = parse_strategy(j.at("strategy").get<std::string>());
  o.passed = j.at("passed").get<bool>();
  if (!j.at("selected").is_null()) o.selected = j["selected"].get<int>();
  o.oracle_pass = j.at("oracle_pass").get<bool>();
  o.unknown = j.value("unknown", false);
  return o;
}

TrialOutcome score(const ProblemRun& run, const SelectionResult& selection, InputStrategy strategy) {
  TrialOutcome o;
  o.task_id = run.problem.task_id;
  o.method = selection.method;
  o.strategy = strategy;
  o.selected = selection.selected;
  auto verdict_of = [&](int idx) {
    auto v = run.verdicts.find(idx);
    return v == run.verdicts.end() ? sandbox::EvalVerdict::kUnknown : v->second;
  };
  if (selection.method == Method::kGreedy) {
    o.oracle_pass = run.greedy && verdict_of(run.greedy->index) == sandbox::EvalVerdict::kPass;
  } else {
    o.oracle_pass = run.oracle_pass();
  }
  if (!selection.selected) return o;  // abstention scores as a failure
  auto v = verdict_of(*selection.selected);
  o.passed = v == sandbox::EvalVerdict::kPass;
  o.unknown = v == sandbox::EvalVerdict::kUnknown;
  return o;
}

double pass_at_1(const std::vector<TrialOutcome>& outcomes) {
  std::size_t counted = 0, passed = 0;
  for (const auto& o : outcomes) {
    if (o.unknown) continue;
    ++counted;
    passed += o.passed;
  }
  return counted ? 100.0 * static_cast<double>(passed) / static_cast<double>(counted) : 0.0;
}

std::array<long long, 3> gap_hundredths(const GapRow& row) {
  if (row.problems == 0) return {0, 0, 0};
  // Round the same way the percentage tables print, then let selection failure absorb the residue.
  auto hundredths = [&](std::size_t c) {
    auto text = fmt::format("{:.2f}", 100.0 * static_cast<double>(c) / static_cast<double>(row.problems));
    text.erase(text.find('.'), 1);
    return std::stoll(text);
  };
  long long pass = hundredths(row.passed);
  long long gen = hundredths(row.generation_failures);
  return {pass, gen, 10000 - pass - gen};
}

GapRow oracle_gap(Method method, const std::vector<TrialOutcome>& outcomes) {
  GapRow row;
  row.method = method;
  for (const auto& o : outcomes) {
    if (o.method != method || o.unknown) continue;
    ++row.problems;
    if (o.passed) {
      ++row.passed;
    } else if (!o.oracle_pass) {
      ++row.generation_failures;
      row.generation_failed.push_back(o.task_id);
    } else {
      ++row.selection_failures;
      row.selection_failed.push_back(o.task_id);
    }
  }
  if (row.problems) {
    const double n = static_cast<double>(row.problems);
    row.pass_pct = 100.0 * static_cast<double>(row.passed) / n;
    row.generation_failure_pct = 100.0 * static_cast<double>(row.generation_failures) / n;
    row.selection_failure_pct = 100.0 * static_cast<double>(row.selection_failures) / n;
  }
  return row;
}

ClusterSummary cluster_diagnostics(const std::vector<ClusterShape>& shapes) {
  ClusterSummary s;
  double clusters = 0, largest = 0;
  for (const auto& shape : shapes) {
    if (shape.clusters == 0) continue;
    ++s.problems;
    clusters += static_cast<double>(shape.clusters);
    largest += static_cast<double>(shape.largest);
    s.clusters_histogram[shape.clusters]++;
    s.largest_histogram[shape.largest]++;
  }
  if (s.problems) {
    s.mean_clusters = clusters / static_cast<double>(s.problems);
    s.mean_largest = largest / static_cast<double>(s.problems);
  }
  return s;
}

ClusterSummary cluster_diagnostics(const std::vector<std::vector<Cluster>>& clusterings) {
  std::vector<ClusterShape> shapes;
  for (const auto& cl : clusterings) {
    ClusterShape shape{cl.size(), 0};
    for (const auto& c : cl) shape.largest = std::max(shape.largest, c.size());
    shapes.push_back(shape);
  }
  return cluster_diagnostics(shapes);
}

std::vector<SweepRow> d_scaling_sweep(const std::vector<ProblemRun>& runs, InputStrategy strategy,
                                      const std::vector<std::size_t>& d_values) {
  std::vector<SweepRow> rows;
  for (auto d : d_values) {
    SweepRow row;
    row.d = d;
    std::vector<TrialOutcome> outcomes;
    std::vector<std::vector<Cluster>> clusterings;
    for (const auto& run : runs) {
      SelectOptions opts;
      opts.prefix = d;
      auto sel = select(run, Method::kSemanticVote, strategy, opts);
      outcomes.push_back(score(run, sel, strategy));
      auto pool = run.scored(strategy, d);
      if (!pool.empty()) clusterings.push_back(cluster_by_fingerprint(pool));
    }
    row.pass_pct = pass_at_1(outcomes);
    row.clusters = cluster_diagnostics(clusterings);
    rows.push_back(std::move(row));
  }
  return rows;
}

GridReport grid_from_outcomes(const std::vector<TrialOutcome>& outcomes, const std::vector<InputStrategy>& strategies,
                              const std::vector<Method>& methods,
                              const std::map<InputStrategy, std::set<std::string>>& available,
                              const std::map<std::string, bool>& oracle) {
  GridReport grid;
  grid.strategies = strategies;
  grid.methods = methods;
  std::set<std::string> kept;
  for (const auto& [task, passes] : oracle) {
    bool all = std::all_of(strategies.begin(), strategies.end(), [&](InputStrategy s) {
      auto it = available.find(s);
      return it != available.end() && it->second.count(task) > 0;
    });
    if (all) kept.insert(task);
  }
  grid.problems = kept.size();
  grid.excluded = oracle.size() - kept.size();
  std::size_t oracle_pass = 0;
  for (const auto& task : kept) oracle_pass += oracle.at(task);
  grid.oracle_pct = kept.empty() ? 0.0 : 100.0 * static_cast<double>(oracle_pass) / static_cast<double>(kept.size());
  for (auto s : strategies) {
    for (auto m : methods) {
      std::vector<TrialOutcome> cell;
      for (const auto& o : outcomes)
        if (o.strategy == s && o.method == m && kept.count(o.task_id)) cell.push_back(o);
      grid.pass_pct[{s, m}] = pass_at_1(cell);
    }
  }
  return grid;
}

GridReport ablation_grid(const std::vector<ProblemRun>& runs, const std::vector<InputStrategy>& strategies,
                         const std::vector<Method>& methods) {
  std::vector<TrialOutcome> outcomes;
  std::map<InputStrategy, std::set<std::string>> available;
  std::map<std::string, bool> oracle;
  for (const auto& run : runs) {
    oracle[run.problem.task_id] = run.oracle_pass();
    for (auto s : strategies) {
      auto it = run.matrices.find(s);
      if (it != run.matrices.end() && it->second.d() > 0) available[s].insert(run.problem.task_id);
      for (auto m : methods) outcomes.push_back(score(run, select(run, m, s), s));
    }
  }
  return grid_from_outcomes(outcomes, strategies, methods, available, oracle);
}

}  // namespace semvote::harness
