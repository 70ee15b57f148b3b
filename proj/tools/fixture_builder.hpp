#pragma once

// Renders every prompt the pipeline will issue for a benchmark and writes the authored
// responses into a fixture directory keyed by prompt hash.

#include <filesystem>
#include <vector>

#include "semvote/types.hpp"
#include "semvote/util.hpp"

namespace semvote::fixture {

// responses: {"k": K, "m": M, "problems": {task_id: {samples, greedy, sketches, variations, direct}}}.
// Returns the number of files written. Throws Error(kConfig) for a task without responses.
std::size_t build_fixture_dir(const std::vector<Problem>& problems, const json& responses,
                              const std::filesystem::path& out);

}  // namespace semvote::fixture
