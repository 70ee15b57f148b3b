#include "semvote/pyexpr.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "semvote/util.hpp"

namespace semvote::py {
namespace {

// Advance past a string literal starting at text[i] (a quote). Returns the index after it.
std::size_t skip_string(std::string_view text, std::size_t i) {
  const char q = text[i];
  const bool triple = text.substr(i, 3) == std::string(3, q);
  std::size_t j = i + (triple ? 3 : 1);
  while (j < text.size()) {
    if (text[j] == '\\') {
      j += 2;
      continue;
    }
    if (triple) {
      if (text.substr(j, 3) == std::string(3, q)) return j + 3;
    } else if (text[j] == q) {
      return j + 1;
    }
    ++j;
  }
  return text.size();
}

bool is_open(char c) { return c == '(' || c == '[' || c == '{'; }
bool is_close(char c) { return c == ')' || c == ']' || c == '}'; }

// Position of the first `sep` at bracket depth 0, or npos.
std::size_t find_top_level(std::string_view text, char sep) {
  int depth = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\'' || c == '"') {
      i = skip_string(text, i);
      continue;
    }
    if (is_open(c)) ++depth;
    if (is_close(c)) --depth;
    if (depth == 0 && c == sep) return i;
    ++i;
  }
  return std::string_view::npos;
}

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i >= s.size()) return false;
  bool digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '_') {
      digit = true;
    } else if (c != '.' && c != 'e' && c != 'E' && c != '-' && c != '+') {
      return false;
    }
  }
  return digit;
}

Type unify(const std::vector<std::string>& elems) {
  if (elems.empty()) return Type::of(Type::Kind::kUnknown);
  Type t = infer_literal_type(elems.front());
  for (std::size_t i = 1; i < elems.size(); ++i) {
    Type u = infer_literal_type(elems[i]);
    if (u == t) continue;
    bool numeric = (t.kind == Type::Kind::kInt || t.kind == Type::Kind::kFloat) &&
                   (u.kind == Type::Kind::kInt || u.kind == Type::Kind::kFloat);
    if (numeric) {
      t = Type::of(Type::Kind::kFloat);
    } else if (t.kind == Type::Kind::kList && u.kind == Type::Kind::kList && !t.args.empty() &&
               t.args[0].kind == Type::Kind::kUnknown) {
      t = u;  // [] followed by [1]
    }
  }
  return t;
}

std::string strip_typing_prefix(std::string_view name) {
  for (std::string_view p : {"typing.", "t."}) {
    if (name.starts_with(p)) return std::string(name.substr(p.size()));
  }
  return std::string(name);
}

}  // namespace

std::string Type::str() const {
  static const char* names[] = {"int", "float", "str", "bool", "None", "list", "tuple", "set", "dict", "Optional", "?"};
  std::string out = names[static_cast<int>(kind)];
  if (!args.empty()) {
    out += "[";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i].str();
    out += "]";
  }
  return out;
}

std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\'' || c == '"') {
      i = skip_string(text, i);
      continue;
    }
    if (is_open(c)) ++depth;
    if (is_close(c)) --depth;
    if (depth == 0 && c == ',') {
      parts.emplace_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
    ++i;
  }
  auto last = trim(text.substr(std::min(start, text.size())));
  if (!last.empty()) parts.emplace_back(last);
  return parts;
}

std::optional<std::string> balanced_call_args(std::string_view text) {
  int depth = 1;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\'' || c == '"') {
      i = skip_string(text, i);
      continue;
    }
    if (is_open(c)) ++depth;
    if (is_close(c) && --depth == 0) return std::string(text.substr(0, i));
    ++i;
  }
  return std::nullopt;
}

Type parse_annotation(std::string_view raw) {
  auto text = trim(raw);
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front()) {
    text = trim(text.substr(1, text.size() - 2));
  }
  if (auto bar = find_top_level(text, '|'); bar != std::string_view::npos) {
    auto lhs = parse_annotation(text.substr(0, bar));
    auto rhs = parse_annotation(text.substr(bar + 1));
    if (rhs.kind == Type::Kind::kNone) return Type::of(Type::Kind::kOptional, {lhs});
    if (lhs.kind == Type::Kind::kNone) return Type::of(Type::Kind::kOptional, {rhs});
    return lhs;
  }
  std::string name;
  std::vector<std::string> inner;
  if (auto br = text.find('['); br != std::string_view::npos && text.back() == ']') {
    name = strip_typing_prefix(trim(text.substr(0, br)));
    inner = split_top_level(text.substr(br + 1, text.size() - br - 2));
  } else {
    name = strip_typing_prefix(text);
  }
  auto arg = [&](std::size_t i) {
    return i < inner.size() ? parse_annotation(inner[i]) : Type::of(Type::Kind::kUnknown);
  };
  using K = Type::Kind;
  if (name == "int") return Type::of(K::kInt);
  if (name == "float" || name == "complex") return Type::of(K::kFloat);
  if (name == "str") return Type::of(K::kStr);
  if (name == "bool") return Type::of(K::kBool);
  if (name == "None" || name == "NoneType") return Type::of(K::kNone);
  if (name == "List" || name == "list" || name == "Sequence" || name == "Iterable" || name == "Collection") {
    return Type::of(K::kList, {arg(0)});
  }
  if (name == "Set" || name == "set" || name == "FrozenSet" || name == "frozenset") return Type::of(K::kSet, {arg(0)});
  if (name == "Dict" || name == "dict" || name == "Mapping") return Type::of(K::kDict, {arg(0), arg(1)});
  if (name == "Tuple" || name == "tuple") {
    std::vector<Type> elems;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (trim(inner[i]) == "...") return Type::of(K::kList, {arg(0)});  // Tuple[int, ...] behaves like a sequence
      elems.push_back(arg(i));
    }
    return Type::of(K::kTuple, std::move(elems));
  }
  if (name == "Optional") return Type::of(K::kOptional, {arg(0)});
  if (name == "Union") {
    for (std::size_t i = 0; i < inner.size(); ++i) {
      auto t = arg(i);
      if (t.kind != K::kNone) return t;
    }
  }
  return Type::of(K::kUnknown);
}

std::optional<std::vector<Param>> parse_signature(std::string_view prompt, std::string_view entry_point) {
  const std::string needle = "def " + std::string(entry_point);
  std::size_t pos = 0;
  while ((pos = prompt.find(needle, pos)) != std::string_view::npos) {
    std::size_t after = pos + needle.size();
    while (after < prompt.size() && prompt[after] == ' ') ++after;
    if (after < prompt.size() && prompt[after] == '(') break;
    pos = after;
  }
  if (pos == std::string_view::npos) return std::nullopt;
  auto open = prompt.find('(', pos);
  auto args = balanced_call_args(prompt.substr(open + 1));
  if (!args) return std::nullopt;

  std::vector<Param> params;
  for (const auto& part : split_top_level(*args)) {
    std::string_view p = part;
    if (auto eq = find_top_level(p, '='); eq != std::string_view::npos) p = trim(p.substr(0, eq));
    if (p == "*" || p == "/" || p.starts_with("**")) continue;
    Param param;
    if (auto colon = find_top_level(p, ':'); colon != std::string_view::npos) {
      param.name = std::string(trim(p.substr(0, colon)));
      param.annotation = parse_annotation(p.substr(colon + 1));
    } else {
      param.name = std::string(p);
    }
    if (param.name == "self") continue;
    params.push_back(std::move(param));
  }
  return params;
}

Type infer_literal_type(std::string_view raw) {
  using K = Type::Kind;
  auto text = trim(raw);
  if (text.empty()) return Type::of(K::kUnknown);
  if (text == "True" || text == "False") return Type::of(K::kBool);
  if (text == "None") return Type::of(K::kNone);
  if (text == "set()") return Type::of(K::kSet, {Type::of(K::kUnknown)});
  const char c = text.front();
  if (c == '\'' || c == '"' || ((c == 'r' || c == 'b' || c == 'u') && text.size() > 1 && (text[1] == '\'' || text[1] == '"'))) {
    return Type::of(K::kStr);
  }
  if (is_number(text)) {
    bool fl = text.find_first_of(".eE") != std::string_view::npos;
    return Type::of(fl ? K::kFloat : K::kInt);
  }
  if (text.size() < 2) return Type::of(K::kUnknown);
  auto inner = text.substr(1, text.size() - 2);
  if (c == '[' && text.back() == ']') return Type::of(K::kList, {unify(split_top_level(inner))});
  if (c == '(' && text.back() == ')') {
    auto elems = split_top_level(inner);
    bool is_tuple = elems.empty() || find_top_level(inner, ',') != std::string_view::npos;
    if (!is_tuple) return infer_literal_type(inner);
    std::vector<Type> ts;
    for (const auto& e : elems) ts.push_back(infer_literal_type(e));
    return Type::of(K::kTuple, std::move(ts));
  }
  if (c == '{' && text.back() == '}') {
    auto elems = split_top_level(inner);
    if (elems.empty()) return Type::of(K::kDict, {Type::of(K::kUnknown), Type::of(K::kUnknown)});
    auto colon = find_top_level(elems.front(), ':');
    if (colon != std::string_view::npos) {
      std::vector<std::string> keys, values;
      for (const auto& e : elems) {
        auto cpos = find_top_level(e, ':');
        if (cpos == std::string_view::npos) continue;
        keys.emplace_back(trim(std::string_view(e).substr(0, cpos)));
        values.emplace_back(trim(std::string_view(e).substr(cpos + 1)));
      }
      return Type::of(K::kDict, {unify(keys), unify(values)});
    }
    return Type::of(K::kSet, {unify(elems)});
  }
  return Type::of(K::kUnknown);
}

std::string quote(std::string_view s) {
  std::string out = "'";
  for (unsigned char ch : s) {
    if (ch == '\\') {
      out += "\\\\";
    } else if (ch == '\'') {
      out += "\\'";
    } else if (ch >= 0x20 && ch < 0x7f) {
      out.push_back(static_cast<char>(ch));
    } else {
      out += fmt::format("\\x{:02x}", ch);
    }
  }
  out += "'";
  return out;
}

}  // namespace semvote::py
