#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <sys/wait.h>

#include "doctest.h"
#include "fixture_builder.hpp"
#include "semvote/error.hpp"
#include "semvote/harness.hpp"
#include "semvote/pipeline.hpp"
#include "semvote/util.hpp"

using namespace semvote;
namespace fs = std::filesystem;

namespace {

const fs::path kBench = fs::path(SEMVOTE_FIXTURE_DIR) / "bench12";

// Two bench12 problems: the divisors pair and one where every candidate errs on a probe.
struct MiniBench {
  fs::path root, benchmark, fixture;
  MiniBench() {
    root = fs::temp_directory_path() / fmt::format("semvote-pipeline-{}", ::getpid());
    fs::remove_all(root);
    fs::create_directories(root);
    benchmark = root / "bench.jsonl";
    fixture = root / "fixture";
    std::string lines;
    for (const auto& row : read_jsonl(kBench / "benchmark.jsonl")) {
      auto id = row.at("task_id").get<std::string>();
      if (id == "fx/00_divisors" || id == "fx/02_first_max_index") lines += row.dump() + "\n";
    }
    write_file_atomic(benchmark, lines);
    fixture::build_fixture_dir(harness::load_benchmark(benchmark), json::parse(read_file(kBench / "responses.json")),
                               fixture);
  }
  ~MiniBench() { fs::remove_all(root); }

  pipeline::Settings settings(const std::string& run) const {
    pipeline::Settings s;
    s.run_dir = root / run;
    s.benchmark = benchmark;
    s.fixture_dir = fixture;
    s.runner = SEMVOTE_RUNNER_SCRIPT;
    s.run.n_candidates = 8;
    s.run.k_sketches = 3;
    s.run.m_instantiations = 2;
    s.run.bootstrap_resamples = 500;
    s.workers = 1;
    s.d_values = {2, 3, 6, 9};
    return s;
  }
};

const MiniBench& bench() {
  static MiniBench b;
  return b;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

int cli(const std::string& args) {
  int status = std::system(fmt::format("'{}' {} >/dev/null 2>&1", SEMVOTE_CLI, args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("pipeline run is idempotent and reports are pure") {
  auto s = bench().settings("full");
  pipeline::Pipeline(s).run_all();
  auto first = snapshot(s.run_dir);
  for (const char* name : {"manifest.json", "candidates.jsonl", "greedy.jsonl", "inputs.sketch.jsonl",
                           "matrix.sketch.jsonl", "selections.jsonl", "evals.jsonl", "outcomes.jsonl",
                           "sweep.sketch.jsonl", "bootstrap.jsonl", "reports/report.md"})
    CHECK_MESSAGE(first.count(name), name);
  CHECK_FALSE(first.count("matrix.sketch.jsonl.journal"));

  // d=9 exceeds D=6 and is skipped.
  auto sweep = read_jsonl(s.run_dir / "sweep.sketch.jsonl");
  REQUIRE(sweep.size() == 3);
  CHECK(sweep.back().at("d") == 6);

  pipeline::Pipeline(s).run_all();
  CHECK(snapshot(s.run_dir) == first);

  fs::remove_all(s.run_dir / "reports");
  pipeline::render_reports(s.run_dir);
  CHECK(snapshot(s.run_dir) == first);

  auto manifest = json::parse(first["manifest.json"]);
  CHECK(manifest.at("config").at("n_candidates") == 8);
  CHECK(manifest.at("benchmark").at("problems") == 2);
  for (const char* stage : {"generate", "inputs.sketch", "execute.sketch", "select", "evaluate", "sweep.sketch",
                            "bootstrap", "report"})
    CHECK_MESSAGE(manifest.at("stages").contains(stage), stage);
}

TEST_CASE("stages name the missing upstream artifact") {
  auto s = bench().settings("partial");
  pipeline::Pipeline p(s);
  try {
    p.execute();
    FAIL("execute ran before generate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
    CHECK_MESSAGE(std::string(e.what()).find("'generate'") != std::string::npos, e.what());
  }
  CHECK_THROWS_AS(pipeline::render_reports(s.run_dir), Error);
}

TEST_CASE("a run directory rejects a different configuration") {
  auto s = bench().settings("config");
  pipeline::Pipeline(s).generate();
  s.run.n_candidates = 4;
  try {
    pipeline::Pipeline(s).generate();
    FAIL("config change accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("missing runner is a configuration error") {
  auto s = bench().settings("norunner");
  s.runner.clear();
  const char* saved = std::getenv("SEMVOTE_RUNNER");
  std::string keep = saved ? saved : "";
  ::unsetenv("SEMVOTE_RUNNER");
  try {
    pipeline::Pipeline(s).generate();
    FAIL("ran without a runner");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  if (saved) ::setenv("SEMVOTE_RUNNER", keep.c_str(), 1);
}

TEST_CASE("settings validation") {
  auto s = bench().settings("v");
  s.run_dir.clear();
  CHECK_THROWS_AS(pipeline::Pipeline{s}, Error);
  s = bench().settings("v");
  s.workers = 0;
  CHECK_THROWS_AS(pipeline::Pipeline{s}, Error);
  s = bench().settings("v");
  s.d_values = {0};
  CHECK_THROWS_AS(pipeline::Pipeline{s}, Error);
}

TEST_CASE("cli exit codes and config file") {
  const auto& b = bench();
  CHECK(cli("") == 2);
  CHECK(cli("--help") == 0);
  CHECK(cli("report") == 2);
  CHECK(cli("--strategy bogus report --run-dir x") == 2);
  CHECK(cli(fmt::format("report --run-dir '{}'", (b.root / "empty").string())) == 1);

  auto s = b.settings("cli");
  auto ini = b.root / "cli.ini";
  write_file_atomic(ini, fmt::format("run-dir = \"{}\"\nbenchmark = \"{}\"\nfixture-dir = \"{}\"\nrunner = \"{}\"\n"
                                     "n = 8\nk = 3\nm = 2\nworkers = 1\n",
                                     s.run_dir.string(), b.benchmark.string(), b.fixture.string(),
                                     SEMVOTE_RUNNER_SCRIPT));
  CHECK(cli(fmt::format("--config '{}' generate", ini.string())) == 0);
  auto manifest = json::parse(read_file(s.run_dir / "manifest.json"));
  CHECK(manifest.at("config").at("k_sketches") == 3);
  // Flags win over the file; the changed N is then refused by the existing run.
  CHECK(cli(fmt::format("--config '{}' --n 5 generate", ini.string())) == 2);

  auto bad = b.root / "bad.ini";
  write_file_atomic(bad, "bogus = 1\n");
  CHECK(cli(fmt::format("--config '{}' report", bad.string())) == 2);
}
