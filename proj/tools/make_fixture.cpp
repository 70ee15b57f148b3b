// make_fixture: build an offline provider directory from authored responses.

#include <iostream>

#include "CLI11.hpp"
#include "fixture_builder.hpp"
#include "semvote/error.hpp"
#include "semvote/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write hash-keyed fixture responses for a benchmark"};
  std::filesystem::path benchmark, responses, out;
  app.add_option("--benchmark", benchmark, "Benchmark JSON Lines")->required();
  app.add_option("--responses", responses, "Authored responses JSON")->required();
  app.add_option("--out", out, "Fixture directory to write")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    auto problems = semvote::harness::load_benchmark(benchmark);
    auto n = semvote::fixture::build_fixture_dir(problems, semvote::json::parse(semvote::read_file(responses)), out);
    std::cout << "wrote " << n << " responses to " << out.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "make_fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
