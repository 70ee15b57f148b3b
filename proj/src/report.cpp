// Markdown and CSV reports rendered purely from a run directory's persisted artifacts.

#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "semvote/error.hpp"
#include "semvote/harness.hpp"
#include "semvote/pipeline.hpp"
#include "semvote/stats.hpp"
#include "semvote/util.hpp"

namespace semvote::pipeline {

namespace fs = std::filesystem;

namespace {

std::string display_name(Method m) {
  switch (m) {
    case Method::kGreedy: return "Greedy";
    case Method::kBestOfN: return "Best-of-N";
    case Method::kMajority: return "MV";
    case Method::kAstMajority: return "AST-MV";
    case Method::kWeighted: return "WV";
    case Method::kMbr: return "MBR-Exec";
    case Method::kSemanticVote: return "SemanticVote";
  }
  return std::string(to_string(m));
}

std::string pct(double v) { return fmt::format("{:.2f}", v); }
std::string centi(long long v) { return fmt::format("{}.{:02d}", v / 100, v % 100); }

std::vector<json> read_if_present(const fs::path& path) { return fs::exists(path) ? read_jsonl(path) : std::vector<json>{}; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string markdown() const {
    std::string out = "| " + join(header, " | ") + " |\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? "---|" : "---:|";
    out += "\n";
    for (const auto& r : rows) out += "| " + join(r, " | ") + " |\n";
    return out;
  }

  std::string csv() const {
    auto line = [](const std::vector<std::string>& cells) {
      std::vector<std::string> quoted;
      for (const auto& c : cells) {
        if (c.find_first_of(",\"\n") == std::string::npos) {
          quoted.push_back(c);
          continue;
        }
        std::string q = "\"";
        for (char ch : c) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        quoted.push_back(q + "\"");
      }
      return join(quoted, ",") + "\n";
    };
    std::string out = line(header);
    for (const auto& r : rows) out += line(r);
    return out;
  }
};

}  // namespace

void render_reports(const fs::path& run_dir) {
  const auto outcomes_path = run_dir / files::kOutcomes;
  if (!fs::exists(outcomes_path)) {
    throw Error(ErrorKind::kMissingArtifact, "missing " + outcomes_path.string() + "; run the 'evaluate' stage first");
  }
  std::vector<harness::TrialOutcome> outcomes;
  for (const auto& row : read_jsonl(outcomes_path)) outcomes.push_back(harness::TrialOutcome::from_json(row));

  std::set<InputStrategy> strategy_set;
  std::set<Method> method_set;
  for (const auto& o : outcomes) {
    strategy_set.insert(o.strategy);
    method_set.insert(o.method);
  }
  std::vector<InputStrategy> strategies;
  for (auto s : kAllStrategies)
    if (strategy_set.count(s)) strategies.push_back(s);
  std::vector<Method> methods;
  for (auto m : kAllMethods)
    if (method_set.count(m)) methods.push_back(m);

  std::map<std::string, bool> oracle;
  std::set<std::string> tasks;
  for (const auto& row : read_jsonl(run_dir / files::kCandidates)) tasks.insert(row.at("task_id").get<std::string>());
  for (const auto& t : tasks) oracle[t] = false;
  std::set<std::pair<std::string, int>> pool_keys;
  for (const auto& row : read_jsonl(run_dir / files::kCandidates))
    pool_keys.insert({row["task_id"].get<std::string>(), row["index"].get<int>()});
  for (const auto& row : read_if_present(run_dir / files::kEvals)) {
    auto key = std::make_pair(row.at("task_id").get<std::string>(), row.at("cand").get<int>());
    if (pool_keys.count(key) && row.at("verdict") == "pass") oracle[key.first] = true;
  }
  std::size_t oracle_count = 0;
  for (const auto& [t, pass] : oracle) oracle_count += pass;

  std::ostringstream md;
  std::map<std::string, Table> csvs;
  md << "# Selection report\n\n";
  if (fs::exists(run_dir / files::kManifest)) {
    auto m = json::parse(read_file(run_dir / files::kManifest));
    const auto& c = m.at("config");
    md << fmt::format("Model `{}`, thinking {}, N={}, K={}, M={}, temperature {}, probe timeout {} s, seed {}.\n",
                      c.at("model").get<std::string>(), c.at("thinking_level").get<std::string>(),
                      c.at("n_candidates").get<std::size_t>(), c.at("k_sketches").get<std::size_t>(),
                      c.at("m_instantiations").get<std::size_t>(), c.at("temperature").get<double>(),
                      c.at("timeout_secs").get<double>(), c.at("rng_seed").get<std::uint64_t>());
    md << fmt::format("Benchmark sha256 `{}` ({} problems).\n\n", c.at("benchmark_sha256").get<std::string>().substr(0, 16),
                      tasks.size());
  }
  std::size_t unknown = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.unknown; });
  if (unknown) md << fmt::format("**{} outcomes had an unknown evaluation and are excluded from rates.**\n\n", unknown);

  // Pass@1 per method and strategy.
  {
    Table t;
    t.header = {"Method"};
    for (auto s : strategies) t.header.push_back(std::string(to_string(s)));
    for (auto m : methods) {
      std::vector<std::string> row = {display_name(m)};
      for (auto s : strategies) {
        std::vector<harness::TrialOutcome> cell;
        for (const auto& o : outcomes)
          if (o.method == m && o.strategy == s) cell.push_back(o);
        row.push_back(cell.empty() ? "-" : pct(harness::pass_at_1(cell)));
      }
      t.rows.push_back(row);
    }
    std::vector<std::string> orow = {"Oracle"};
    for (std::size_t i = 0; i < strategies.size(); ++i)
      orow.push_back(pct(tasks.empty() ? 0.0 : 100.0 * static_cast<double>(oracle_count) / static_cast<double>(tasks.size())));
    t.rows.push_back(orow);
    md << "## Pass@1 (%)\n\n" << t.markdown() << "\n";
    csvs["pass_at_1.csv"] = t;
  }

  // Strategy x aggregator grid over problems with inputs under every strategy.
  std::vector<Method> grid_methods;
  for (auto m : {Method::kSemanticVote, Method::kWeighted, Method::kMbr})
    if (method_set.count(m)) grid_methods.push_back(m);
  if (!grid_methods.empty()) {
    std::map<InputStrategy, std::set<std::string>> available;
    for (auto s : strategies)
      for (const auto& row : read_if_present(run_dir / files::inputs(s))) available[s].insert(row.at("task_id").get<std::string>());
    auto grid = harness::grid_from_outcomes(outcomes, strategies, grid_methods, available, oracle);
    Table t;
    t.header = {"Strategy"};
    for (auto m : grid_methods) t.header.push_back(display_name(m));
    for (auto s : strategies) {
      std::vector<std::string> row = {std::string(to_string(s))};
      for (auto m : grid_methods) row.push_back(pct(grid.pass_pct.at({s, m})));
      t.rows.push_back(row);
    }
    md << fmt::format("## Input strategies ({} problems with inputs under every strategy, {} excluded)\n\n", grid.problems,
                      grid.excluded)
       << t.markdown() << fmt::format("\nOracle on this subset: {}\n\n", pct(grid.oracle_pct));
    csvs["strategy_grid.csv"] = t;
  }

  const InputStrategy primary = strategies.empty() ? InputStrategy::kSketch : strategies.front();

  // Oracle-gap decomposition.
  {
    Table t, detail;
    t.header = {"Method", "Pass@1", "Generation failure", "Selection failure"};
    detail.header = {"method", "task_id", "failure"};
    for (auto m : methods) {
      std::vector<harness::TrialOutcome> mine;
      for (const auto& o : outcomes)
        if (o.method == m && o.strategy == primary) mine.push_back(o);
      auto gap = harness::oracle_gap(m, mine);
      auto parts = harness::gap_hundredths(gap);
      t.rows.push_back({display_name(m), centi(parts[0]), centi(parts[1]), centi(parts[2])});
      for (const auto& task : gap.generation_failed) detail.rows.push_back({std::string(to_string(m)), task, "generation"});
      for (const auto& task : gap.selection_failed) detail.rows.push_back({std::string(to_string(m)), task, "selection"});
    }
    md << fmt::format("## Oracle gap ({} inputs)\n\n", to_string(primary)) << t.markdown() << "\n";
    csvs["oracle_gap.csv"] = t;
    csvs["oracle_gap_problems.csv"] = detail;
  }

  // Cluster diagnostics from SemanticVote selections.
  {
    std::vector<harness::ClusterShape> shapes;
    for (const auto& row : read_if_present(run_dir / files::kSelections)) {
      if (row.at("method") != "semanticvote" || row.at("strategy") != std::string(to_string(primary))) continue;
      shapes.push_back({row.at("cluster_count").get<std::size_t>(), row.at("largest_cluster").get<std::size_t>()});
    }
    auto s = harness::cluster_diagnostics(shapes);
    if (s.problems > 0) {
      Table t;
      t.header = {"Clusters", "Problems"};
      for (const auto& [k, v] : s.clusters_histogram) t.rows.push_back({std::to_string(k), std::to_string(v)});
      md << fmt::format("## Clusters (SemanticVote, {} inputs)\n\nAverage clusters per problem {}, average largest cluster {}.\n\n",
                        to_string(primary), pct(s.mean_clusters), pct(s.mean_largest))
         << t.markdown() << "\n";
      csvs["clusters.csv"] = t;
    }
  }

  // D-scaling.
  for (auto s : strategies) {
    auto rows = read_if_present(run_dir / files::sweep(s));
    if (rows.empty()) continue;
    Table t;
    t.header = {"D", "Pass@1", "Avg. clusters/problem", "Avg. largest cluster"};
    for (const auto& r : rows) {
      t.rows.push_back({std::to_string(r.at("d").get<std::size_t>()), pct(r.at("pass_pct").get<double>()),
                        pct(r.at("mean_clusters").get<double>()), pct(r.at("mean_largest").get<double>())});
    }
    md << fmt::format("## Input budget ({} inputs, SemanticVote)\n\n", to_string(s)) << t.markdown() << "\n";
    csvs[fmt::format("d_sweep.{}.csv", to_string(s))] = t;
  }

  // Paired bootstrap.
  {
    auto rows = read_if_present(run_dir / files::kBootstrap);
    if (!rows.empty()) {
      Table t;
      t.header = {"Comparison", "strategy", "pass_a", "pass_b", "delta_pp", "ci_low", "ci_high", "p_value", "resamples", "seed"};
      md << "## Paired bootstrap\n\n| Comparison | A | B | Δ (pp) | 95% CI | p |\n|---|---:|---:|---:|---:|---:|\n";
      for (const auto& r : rows) {
        const auto& rep = r.at("report");
        stats::BootstrapReport b;
        b.delta_pp = rep.at("delta_pp").get<double>();
        b.ci_low = rep.at("ci_low").get<double>();
        b.ci_high = rep.at("ci_high").get<double>();
        b.p_value = rep.at("p_value").get<double>();
        auto label = fmt::format("{} vs {} ({})", display_name(parse_method(r.at("a").get<std::string>())),
                                 display_name(parse_method(r.at("b").get<std::string>())), r.at("strategy").get<std::string>());
        md << b.to_markdown_row(label, r.at("pass_a").get<double>(), r.at("pass_b").get<double>()) << "\n";
        t.rows.push_back({label, r.at("strategy").get<std::string>(), pct(r.at("pass_a").get<double>()),
                          pct(r.at("pass_b").get<double>()), fmt::format("{:.4f}", b.delta_pp), fmt::format("{:.4f}", b.ci_low),
                          fmt::format("{:.4f}", b.ci_high), fmt::format("{:.4f}", b.p_value),
                          std::to_string(rep.at("resamples").get<std::size_t>()),
                          std::to_string(rep.at("seed").get<std::uint64_t>())});
      }
      md << fmt::format("\nResamples: {}, seed {}, generator {}.\n", rows.front()["report"]["resamples"].get<std::size_t>(),
                        rows.front()["report"]["seed"].get<std::uint64_t>(), rows.front()["report"]["rng"].get<std::string>());
      csvs["bootstrap.csv"] = t;
    }
  }

  const auto out = run_dir / files::kReports;
  fs::create_directories(out);
  write_file_atomic(out / "report.md", md.str());
  for (const auto& [name, table] : csvs) write_file_atomic(out / name, table.csv());
}

}  // namespace semvote::pipeline
