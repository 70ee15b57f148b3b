#include "semvote/input_gen.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "semvote/error.hpp"
#include "semvote/prompts.hpp"
#include "semvote/pyexpr.hpp"
#include "semvote/stats.hpp"

namespace semvote::inputs {
namespace {

// Candidate JSON arrays in order of appearance; bracket matching is JSON-string aware.
std::vector<json> json_arrays(const std::string& text) {
  std::vector<json> out;
  for (std::size_t start = text.find('['); start != std::string::npos; start = text.find('[', start + 1)) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '[') ++depth;
      else if (c == ']' && --depth == 0) {
        try {
          auto doc = json::parse(text.substr(start, i - start + 1));
          if (doc.is_array()) {
            out.push_back(std::move(doc));
            return out;
          }
        } catch (const json::exception&) {
        }
        break;
      }
    }
  }
  return out;
}

std::string scalar_to_expr(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
  if (v.is_null()) return "None";
  return v.dump();
}

struct Collected {
  std::vector<std::string> exprs;
  bool provider_failed = false;
};

// Query `prompt` until `want` valid expressions are collected or retries run out.
template <typename Parse>
Collected collect(llm::Gateway& gateway, const std::string& prompt, std::size_t want, std::size_t first_sample,
                  const GenOptions& options, const ExprValidator& valid, Parse&& parse) {
  Collected got;
  for (std::size_t attempt = 0; attempt <= options.max_retries && got.exprs.size() < want; ++attempt) {
    std::string text;
    try {
      text = gateway.complete(prompt, options.params, first_sample + attempt);
    } catch (const Error& e) {
      spdlog::warn("input generation request failed: {}", e.what());
      got.provider_failed = true;
      break;
    }
    std::vector<std::string> exprs;
    try {
      exprs = parse(text);
    } catch (const Error& e) {
      spdlog::warn("unusable input-generation response: {}", e.what());
      continue;
    }
    for (auto& e : exprs) {
      if (got.exprs.size() >= want) break;
      if (!trim(e).empty() && valid(e)) got.exprs.push_back(std::move(e));
    }
  }
  return got;
}

// --- random strategy -------------------------------------------------------

class Fuzzer {
 public:
  explicit Fuzzer(std::uint64_t seed) : rng_(seed) {}

  std::string value(const py::Type& t, int depth) {
    using K = py::Type::Kind;
    auto elem = [&](std::size_t i) {
      if (depth >= 1) return py::Type::of(K::kInt);
      return i < t.args.size() && t.args[i].kind != K::kUnknown ? t.args[i] : py::Type::of(K::kInt);
    };
    switch (t.kind) {
      case K::kInt:
      case K::kUnknown: return integer();
      case K::kFloat: return real();
      case K::kStr: return text();
      case K::kBool: return draw(2) ? "True" : "False";
      case K::kNone: return "None";
      case K::kOptional:
        if (draw(100) < 5) return "None";
        return value(t.args.empty() ? py::Type::of(K::kInt) : t.args[0], depth);
      case K::kList: return sequence("[", "]", elem(0), depth);
      case K::kSet: {
        auto n = draw(13);
        if (n == 0) return "set()";
        std::vector<std::string> items;
        for (std::size_t i = 0; i < n; ++i) items.push_back(value(elem(0), depth + 1));
        return "{" + join(items, ", ") + "}";
      }
      case K::kTuple: {
        if (t.args.empty()) return sequence("(", ")", py::Type::of(K::kInt), depth);
        std::vector<std::string> items;
        for (std::size_t i = 0; i < t.args.size(); ++i) items.push_back(value(elem(i), depth + 1));
        return items.size() == 1 ? "(" + items[0] + ",)" : "(" + join(items, ", ") + ")";
      }
      case K::kDict: {
        auto n = draw(13);
        std::vector<std::string> items;
        for (std::size_t i = 0; i < n; ++i) {
          auto key_type = !t.args.empty() && t.args[0].kind != K::kUnknown ? t.args[0] : py::Type::of(K::kStr);
          items.push_back(value(depth >= 1 ? py::Type::of(K::kInt) : key_type, depth + 1) + ": " +
                          value(elem(1), depth + 1));
        }
        return "{" + join(items, ", ") + "}";
      }
    }
    return integer();
  }

 private:
  std::uint64_t draw(std::uint64_t bound) { return stats::bounded_draw(rng_, bound); }

  std::string integer() {
    if (draw(10) < 3) return std::to_string(static_cast<int>(draw(3)) - 1);
    return std::to_string(static_cast<long long>(draw(2'000'001)) - 1'000'000);
  }

  std::string real() {
    if (draw(10) == 0) return "0.0";
    auto milli = static_cast<long long>(draw(2'000'001)) - 1'000'000;
    return fmt::format("{:.3f}", static_cast<double>(milli) / 1000.0);
  }

  std::string text() {
    auto len = draw(21);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>(' ' + draw(95)));
    return py::quote(s);
  }

  std::string sequence(const char* open, const char* close, const py::Type& elem, int depth) {
    auto n = draw(13);
    std::vector<std::string> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back(value(elem, depth + 1));
    std::string body = join(items, ", ");
    if (std::string_view(open) == "(" && items.size() == 1) body += ",";
    return open + body + close;
  }

  std::mt19937_64 rng_;
};

std::string pack_arguments(const std::vector<std::string>& args) {
  if (args.size() == 1) return "(" + args[0] + ",)";
  return "(" + join(args, ", ") + ")";
}

void add_if_new(std::vector<std::string>& out, std::string expr) {
  if (std::find(out.begin(), out.end(), expr) == out.end()) out.push_back(std::move(expr));
}

// Calls `<entry>(...)` in the prompt: interactive-session lines first, then bare calls in prose.
std::vector<std::string> scan_calls(const std::string& prompt, const std::string& entry) {
  std::vector<std::string> found;
  const std::string needle = entry + "(";
  for (const auto& line : split_lines(prompt)) {
    auto t = trim(line);
    for (std::size_t pos = t.find(needle); pos != std::string_view::npos; pos = t.find(needle, pos + 1)) {
      if (pos > 0) {
        char before = t[pos - 1];
        if (std::isalnum(static_cast<unsigned char>(before)) || before == '_' || before == '.') continue;
      }
      if (pos >= 4 && t.substr(pos - 4, 4) == "def ") continue;
      auto args = py::balanced_call_args(t.substr(pos + needle.size()));
      if (!args) continue;
      add_if_new(found, pack_arguments(py::split_top_level(*args)));
    }
  }
  return found;
}

}  // namespace

std::vector<InputSketch> parse_sketch_response(const std::string& text) {
  auto arrays = json_arrays(text);
  if (arrays.empty()) throw Error(ErrorKind::kParse, "no JSON array in sketch response");
  std::vector<InputSketch> sketches;
  for (const auto& el : arrays.front()) {
    if (!el.is_object() || !el.contains("description") || !el.contains("input_expr") ||
        !el["description"].is_string() || !el["input_expr"].is_string()) {
      spdlog::warn("skipping malformed sketch element: {}", el.dump());
      continue;
    }
    InputSketch s{el["description"].get<std::string>(), el["input_expr"].get<std::string>()};
    if (trim(s.description).empty() || trim(s.input_expr).empty()) {
      spdlog::warn("skipping sketch with an empty field");
      continue;
    }
    sketches.push_back(std::move(s));
  }
  if (sketches.empty()) throw Error(ErrorKind::kParse, "sketch response contained no usable sketches");
  return sketches;
}

std::vector<std::string> parse_expression_array(const std::string& text) {
  auto arrays = json_arrays(text);
  if (arrays.empty()) throw Error(ErrorKind::kParse, "no JSON array in response");
  std::vector<std::string> out;
  for (const auto& el : arrays.front()) {
    if (el.is_object() && el.contains("input_expr") && el["input_expr"].is_string()) {
      out.push_back(el["input_expr"].get<std::string>());
    } else if (el.is_primitive()) {
      out.push_back(scalar_to_expr(el));
    }
  }
  return out;
}

InputSet gen_sketch_inputs(const Problem& problem, std::size_t k, std::size_t m, llm::Gateway& gateway,
                           const ExprValidator& valid, const GenOptions& options) {
  if (k < 1 || m < 1) throw Error(ErrorKind::kConfig, "k and m must be >= 1");
  const auto sketch_prompt = prompts::sketch_prompt(problem.prompt, k);

  std::vector<InputSketch> sketches;
  bool provider_failed = false;
  for (std::size_t attempt = 0; attempt <= options.max_retries && sketches.size() < k; ++attempt) {
    std::string text;
    try {
      text = gateway.complete(sketch_prompt, options.params, attempt);
    } catch (const Error& e) {
      spdlog::warn("{}: sketch request failed: {}", problem.task_id, e.what());
      provider_failed = true;
      break;
    }
    try {
      for (auto& s : parse_sketch_response(text)) {
        if (sketches.size() < k && valid(s.input_expr)) sketches.push_back(std::move(s));
      }
    } catch (const Error& e) {
      spdlog::warn("{}: {}", problem.task_id, e.what());
    }
  }
  if (sketches.empty()) {
    throw Error(ErrorKind::kInputGeneration,
                problem.task_id + ": no valid input sketches" + (provider_failed ? " (provider unavailable)" : ""));
  }

  // Missing sketch slots reuse surviving sketches; `copy` keeps their variation requests distinct.
  InputSet set;
  set.strategy = InputStrategy::kSketch;
  const std::size_t survivors = sketches.size();
  for (std::size_t slot = 0; slot < k; ++slot) {
    const InputSketch& sk = sketches[slot % survivors];
    const std::size_t copy = slot / survivors;
    std::vector<std::string> instances = {sk.input_expr};
    if (m > 1) {
      auto prompt = prompts::variation_prompt(sk.description, sk.input_expr, problem.prompt, m - 1);
      auto got = collect(gateway, prompt, m - 1, copy * (options.max_retries + 1), options, valid,
                         [](const std::string& t) { return parse_expression_array(t); });
      for (auto& e : got.exprs) instances.push_back(std::move(e));
      for (std::size_t i = 0; instances.size() < m; ++i) instances.push_back(instances[i]);
    }
    for (auto& expr : instances) {
      TestInput in;
      in.index = set.inputs.size();
      in.expr = std::move(expr);
      in.sketch_id = slot;
      in.sketch_description = sk.description;
      in.strategy = InputStrategy::kSketch;
      set.inputs.push_back(std::move(in));
    }
  }
  return set;
}

InputSet gen_direct_inputs(const Problem& problem, std::size_t d, llm::Gateway& gateway, const ExprValidator& valid,
                           const GenOptions& options) {
  if (d < 1) throw Error(ErrorKind::kConfig, "d must be >= 1");
  auto got = collect(gateway, prompts::direct_prompt(problem.prompt, d), d, 0, options, valid,
                     [](const std::string& t) { return parse_expression_array(t); });
  if (got.exprs.empty()) {
    throw Error(ErrorKind::kInputGeneration, problem.task_id + ": direct input generation produced no valid inputs");
  }
  for (std::size_t i = 0; got.exprs.size() < d; ++i) got.exprs.push_back(got.exprs[i]);
  InputSet set;
  set.strategy = InputStrategy::kDirect;
  for (auto& e : got.exprs) {
    TestInput in;
    in.index = set.inputs.size();
    in.expr = std::move(e);
    in.strategy = InputStrategy::kDirect;
    set.inputs.push_back(std::move(in));
  }
  return set;
}

InputSet gen_random_inputs(const Problem& problem, std::size_t d, std::uint64_t seed) {
  using K = py::Type::Kind;
  std::vector<py::Type> types;
  auto params = py::parse_signature(problem.prompt, problem.entry_point);
  auto examples = extract_example_inputs(problem);
  std::vector<std::string> example_args;
  if (!examples.inputs.empty()) {
    auto e = trim(examples.inputs.front().expr);
    example_args = py::split_top_level(e.substr(1, e.size() - 2));
  }
  const std::size_t arity = params ? params->size() : std::max<std::size_t>(1, example_args.size());
  for (std::size_t i = 0; i < arity; ++i) {
    py::Type t = py::Type::of(K::kUnknown);
    if (params && (*params)[i].annotation) t = *(*params)[i].annotation;
    if (t.kind == K::kUnknown && i < example_args.size()) t = py::infer_literal_type(example_args[i]);
    if (t.kind == K::kUnknown) t = py::Type::of(K::kInt);
    types.push_back(std::move(t));
  }

  // Mix the task id into the seed so problems draw different values under one run seed.
  std::uint64_t mixed = seed;
  for (unsigned char c : problem.task_id) mixed = (mixed ^ c) * 0x100000001b3ull;
  Fuzzer fuzz(mixed);
  InputSet set;
  set.strategy = InputStrategy::kRandom;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::string> args;
    for (const auto& t : types) args.push_back(fuzz.value(t, 0));
    TestInput in;
    in.index = i;
    in.expr = pack_arguments(args);
    in.strategy = InputStrategy::kRandom;
    set.inputs.push_back(std::move(in));
  }
  return set;
}

InputSet extract_example_inputs(const Problem& problem) {
  auto exprs = scan_calls(problem.prompt, problem.entry_point);
  if (exprs.empty()) exprs = problem.example_inputs;
  InputSet set;
  set.strategy = InputStrategy::kExample;
  for (auto& e : exprs) {
    TestInput in;
    in.index = set.inputs.size();
    in.expr = std::move(e);
    in.strategy = InputStrategy::kExample;
    set.inputs.push_back(std::move(in));
  }
  return set;
}

std::vector<json> to_rows(const std::string& task_id, const InputSet& set) {
  std::vector<json> rows;
  for (const auto& in : set.inputs) {
    json j;
    j["task_id"] = task_id;
    j["strategy"] = std::string(to_string(set.strategy));
    j["index"] = in.index;
    j["sketch_id"] = in.sketch_id ? json(*in.sketch_id) : json(nullptr);
    j["description"] = in.sketch_description;
    j["expr"] = in.expr;
    rows.push_back(std::move(j));
  }
  return rows;
}

InputSet from_rows(const std::vector<json>& rows) {
  InputSet set;
  for (const auto& r : rows) {
    TestInput in;
    in.index = r.at("index").get<std::size_t>();
    in.expr = r.at("expr").get<std::string>();
    if (!r.at("sketch_id").is_null()) in.sketch_id = r["sketch_id"].get<std::size_t>();
    in.sketch_description = r.value("description", "");
    in.strategy = parse_strategy(r.at("strategy").get<std::string>());
    set.strategy = in.strategy;
    set.inputs.push_back(std::move(in));
  }
  std::sort(set.inputs.begin(), set.inputs.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return set;
}

}  // namespace semvote::inputs
