#pragma once

// Test-input generation under four strategies: sketch, direct, random, example-only.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semvote/llm_gateway.hpp"
#include "semvote/types.hpp"
#include "semvote/util.hpp"

namespace semvote::inputs {

struct InputSketch {
  std::string description;
  std::string input_expr;
};

// True when the expression is acceptable as a probe input.
using ExprValidator = std::function<bool(const std::string&)>;

// First JSON array in the response (prose and code fences tolerated). Elements lacking
// either field are skipped with a warning. Throws Error(kParse) when nothing usable remains.
std::vector<InputSketch> parse_sketch_response(const std::string& text);

// First JSON array of expressions; non-string scalars are rendered as literals.
// Throws Error(kParse) if no array is found.
std::vector<std::string> parse_expression_array(const std::string& text);

struct GenOptions {
  llm::SamplingParams params;
  std::size_t max_retries = 2;  // extra provider rounds per prompt when output is short or invalid
};

// K sketches x M instances; sketch i's own expression is its first instance.
// Throws Error(kInputGeneration) when no valid sketch can be obtained.
InputSet gen_sketch_inputs(const Problem& problem, std::size_t k, std::size_t m, llm::Gateway& gateway,
                           const ExprValidator& valid, const GenOptions& options = {});

InputSet gen_direct_inputs(const Problem& problem, std::size_t d, llm::Gateway& gateway, const ExprValidator& valid,
                           const GenOptions& options = {});

// Pure function of (problem, d, seed).
InputSet gen_random_inputs(const Problem& problem, std::size_t d, std::uint64_t seed);

// Interactive-session lines and entry-point calls in the prompt; may be empty.
InputSet extract_example_inputs(const Problem& problem);

// JSON Lines rows {task_id, strategy, index, sketch_id, description, expr}.
std::vector<json> to_rows(const std::string& task_id, const InputSet& set);
InputSet from_rows(const std::vector<json>& rows);


}  // namespace semvote::inputs
