#pragma once

// Just enough of the candidate language's surface syntax to infer argument types,
// pull call arguments out of docstrings, and print generated literals.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semvote::py {

struct Type {
  enum class Kind { kInt, kFloat, kStr, kBool, kNone, kList, kTuple, kSet, kDict, kOptional, kUnknown };
  Kind kind = Kind::kUnknown;
  std::vector<Type> args;  // element types; tuple may list several, dict has key and value

  static Type of(Kind k, std::vector<Type> a = {}) { return Type{k, std::move(a)}; }
  std::string str() const;
  friend bool operator==(const Type&, const Type&) = default;
};

// "List[int]", "list[tuple[int, str]]", "Optional[str]", "int | None" ...; unknown names map to kUnknown.
Type parse_annotation(std::string_view text);

struct Param {
  std::string name;
  std::optional<Type> annotation;
};

// Parameters of `def <entry_point>(...)` in the prompt; nullopt if the def is not found.
std::optional<std::vector<Param>> parse_signature(std::string_view prompt, std::string_view entry_point);

// Type of a literal expression ("[1, 2]" -> list[int]); kUnknown when not a literal.
Type infer_literal_type(std::string_view expr);

// Top-level comma split honouring brackets and string literals.
std::vector<std::string> split_top_level(std::string_view text);

// Given text starting right after an opening '(', returns the argument text up to the
// matching ')' or nullopt if unbalanced.
std::optional<std::string> balanced_call_args(std::string_view text_after_paren);

// Python single-quoted string literal for printable text.
std::string quote(std::string_view s);

}  // namespace semvote::py
