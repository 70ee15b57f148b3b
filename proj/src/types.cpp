#include "semvote/types.hpp"

#include <string>

#include "semvote/error.hpp"

namespace semvote {
namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<std::string_view, E> (&table)[N], const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorKind::kConfig, std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, ThinkingLevel> kThinking[] = {
    {"low", ThinkingLevel::kLow}, {"medium", ThinkingLevel::kMedium}, {"high", ThinkingLevel::kHigh}};
constexpr std::pair<std::string_view, InputStrategy> kStrategies[] = {{"sketch", InputStrategy::kSketch},
                                                                      {"direct", InputStrategy::kDirect},
                                                                      {"random", InputStrategy::kRandom},
                                                                      {"example", InputStrategy::kExample}};
constexpr std::pair<std::string_view, ExecStatus> kStatuses[] = {
    {"ok", ExecStatus::kOk}, {"err", ExecStatus::kErr}, {"timeout", ExecStatus::kTimeout}};
constexpr std::pair<std::string_view, Method> kMethods[] = {
    {"semanticvote", Method::kSemanticVote}, {"majority", Method::kMajority},
    {"ast_majority", Method::kAstMajority},  {"weighted", Method::kWeighted},
    {"mbr", Method::kMbr},                   {"best_of_n", Method::kBestOfN},
    {"greedy", Method::kGreedy}};

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

}  // namespace

std::string_view to_string(ThinkingLevel v) { return name_of(v, kThinking); }
std::string_view to_string(InputStrategy v) { return name_of(v, kStrategies); }
std::string_view to_string(ExecStatus v) { return name_of(v, kStatuses); }
std::string_view to_string(Method v) { return name_of(v, kMethods); }

ThinkingLevel parse_thinking_level(std::string_view s) { return parse_enum(s, kThinking, "thinking level"); }
InputStrategy parse_strategy(std::string_view s) { return parse_enum(s, kStrategies, "strategy"); }
ExecStatus parse_status(std::string_view s) { return parse_enum(s, kStatuses, "status"); }
Method parse_method(std::string_view s) { return parse_enum(s, kMethods, "method"); }

void RunConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorKind::kConfig, msg); };
  if (n_candidates < 1) fail("n_candidates must be >= 1");
  if (k_sketches < 1) fail("k_sketches must be >= 1");
  if (m_instantiations < 1) fail("m_instantiations must be >= 1");
  if (!(timeout_secs > 0)) fail("timeout_secs must be > 0");
  if (bootstrap_resamples < 1) fail("bootstrap_resamples must be >= 1");
}

}  // namespace semvote
