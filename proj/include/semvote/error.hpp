#pragma once

#include <stdexcept>
#include <string>

namespace semvote {

enum class ErrorKind {
  kStructural,     // malformed shapes: length mismatch, bad record
  kEmptyPool,
  kConfig,         // bad flag / missing env var; CLI exit code 2
  kProviderUnavailable,
  kParse,
  kInputGeneration,
  kMissingArtifact,
  kSandbox,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace semvote
