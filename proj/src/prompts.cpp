#include "semvote/prompts.hpp"

#include <string>

namespace semvote::prompts {
namespace {

constexpr std::string_view kCandidateTemplate = R"PROMPT(Complete the following Python function.
Write ONLY the function body (the lines
that go inside the function). Do NOT
repeat the function signature, docstring,
or imports. Do NOT use markdown fences.

{prompt}
)PROMPT";

constexpr std::string_view kSketchTemplate = R"PROMPT(You are generating diverse test inputs
for a Python function.

Function signature and description:
{problem_description}

Generate {K} diverse INPUT SKETCHES. Each
sketch should target a fundamentally
different equivalence class of behavior.
Think about:
- Edge cases (empty, single element,
  None, zero, negative)
- Boundary values (max int, very long
  strings, deeply nested)
- Typical cases (medium-sized, mixed types)
- Special structure (sorted, reversed,
  all duplicates, alternating)

For each sketch, provide:
1. A short description of what case it tests
2. A concrete Python expression that
   produces a valid input

Output as JSON array:
[{"description": "...", "input_expr": "..."}]

Generate EXACTLY {K} sketches.
)PROMPT";

constexpr std::string_view kVariationTemplate = R"PROMPT(Given this input sketch for a Python
function:
Description: {description}
Example: {input_expr}

Function info:
{problem_description}

Generate {M} more concrete inputs that
follow the SAME pattern but with different
specific values. Output as a JSON array
of Python expressions.

Return ONLY the JSON array, no other text.
)PROMPT";

// Direct strategy, template version "direct-v1". Same framing as the sketch prompt
// without the category stage.
constexpr std::string_view kDirectTemplate = R"PROMPT(You are generating diverse test inputs
for a Python function.

Function signature and description:
{problem_description}

Generate {D} diverse concrete inputs for this
function. Cover edge cases, boundary values,
typical cases and special structure.

Each input is a Python expression that
produces a valid input; use a tuple
expression for multiple arguments.

Output as JSON array of Python expressions:
["...", "..."]

Generate EXACTLY {D} inputs.
Return ONLY the JSON array, no other text.
)PROMPT";

std::string substitute(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> vars) {
  std::string out(tmpl);
  for (const auto& [name, value] : vars) {
    const std::string token = "{" + std::string(name) + "}";
    for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + value.size())) {
      out.replace(pos, token.size(), value);
    }
  }
  return out;
}

}  // namespace

std::string_view direct_template_version() { return "direct-v1"; }

std::string candidate_prompt(std::string_view problem_prompt) {
  return substitute(kCandidateTemplate, {{"prompt", problem_prompt}});
}

std::string sketch_prompt(std::string_view problem_description, std::size_t k) {
  const auto ks = std::to_string(k);
  return substitute(kSketchTemplate, {{"problem_description", problem_description}, {"K", ks}});
}

std::string variation_prompt(std::string_view description, std::string_view input_expr,
                             std::string_view problem_description, std::size_t more) {
  const auto ms = std::to_string(more);
  return substitute(kVariationTemplate, {{"description", description},
                                         {"input_expr", input_expr},
                                         {"problem_description", problem_description},
                                         {"M", ms}});
}

std::string direct_prompt(std::string_view problem_description, std::size_t d) {
  const auto ds = std::to_string(d);
  return substitute(kDirectTemplate, {{"problem_description", problem_description}, {"D", ds}});
}

}  // namespace semvote::prompts
