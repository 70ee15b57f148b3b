#pragma once

// Zero-shot prompt templates for candidate sampling and input generation.

#include <cstddef>
#include <string>
#include <string_view>

namespace semvote::prompts {

std::string candidate_prompt(std::string_view problem_prompt);
std::string sketch_prompt(std::string_view problem_description, std::size_t k);
// `more` is the number of additional instances requested for one sketch.
std::string variation_prompt(std::string_view description, std::string_view input_expr,
                             std::string_view problem_description, std::size_t more);
std::string direct_prompt(std::string_view problem_description, std::size_t d);
std::string_view direct_template_version();

}  // namespace semvote::prompts
