#pragma once

// Drives the in-sandbox runner over its JSON wire protocol: one worker process per job,
// wall-clock deadline and resource limits enforced here.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semvote/types.hpp"
#include "semvote/util.hpp"

namespace semvote::sandbox {

enum class ExecMode { kExec, kParse, kCanon, kEvalTests };
std::string_view to_string(ExecMode m);

struct ExecJob {
  ExecMode mode = ExecMode::kExec;
  std::string source;
  std::string entry_point;
  std::string input_expr;
  std::string test_suite;
  double timeout_secs = 5.0;
};

// The JSON object written to the runner's stdin.
std::string wire_request(const ExecJob& job);

struct RunnerSpec {
  std::vector<std::string> command;  // e.g. {"python3", "-S", "runner.py"}
  std::size_t address_space_bytes = 512ull << 20;
  std::size_t max_output_bytes = 1ull << 20;
  std::chrono::milliseconds kill_grace{1000};

  // python3 -S <script>; the interpreter is looked up on PATH.
  static RunnerSpec python(const std::filesystem::path& script);
};

enum class WorkerEnd { kCompleted, kTimeout, kOutputTooLarge, kInfraFailure };

struct WorkerResult {
  WorkerEnd end = WorkerEnd::kInfraFailure;
  std::string status;  // "ok" | "err" when completed
  std::string value;
  std::string diagnostic;
  std::chrono::milliseconds elapsed{0};
};

enum class EvalVerdict { kPass, kFail, kUnknown };
std::string_view to_string(EvalVerdict v);

class Sandbox {
 public:
  explicit Sandbox(RunnerSpec spec);

  // One raw worker invocation; never throws for candidate behaviour.
  WorkerResult invoke(const ExecJob& job) const;

  // mode == exec. Infrastructure failures are retried once, then recorded as (err, "SandboxError").
  ExecRecord run_one(const ExecJob& job) const;
  bool check_syntax(const std::string& source) const;
  std::optional<std::string> canonical_ast_key(const std::string& source) const;
  EvalVerdict eval_tests(const std::string& source, const std::string& entry_point, const std::string& test_suite,
                         double timeout_secs) const;

  // "<interpreter version>" as reported by the runner command, for run metadata.
  std::string interpreter_version() const;
  const RunnerSpec& spec() const { return spec_; }

 private:
  RunnerSpec spec_;
  std::string resolved_program_;
};

// Fenced-block removal, repeated-signature removal and re-indentation under the problem's
// header (everything in the prompt before the entry point's def) and signature.
struct Assembly {
  std::string source;
  bool empty_body = false;
};
Assembly assemble_source_text(const Problem& problem, const std::string& body_raw);

// Validity comes from the runner's parse mode; an empty body is always invalid.
Candidate assemble_source(const Problem& problem, const std::string& body_raw, int index, const Sandbox& sandbox);

class ExecMatrix {
 public:
  ExecMatrix() = default;
  ExecMatrix(std::string task_id, std::vector<int> candidates, std::size_t d);

  const std::string& task_id() const { return task_id_; }
  const std::vector<int>& candidates() const { return candidates_; }
  std::size_t d() const { return d_; }

  bool has(int cand, std::size_t input) const;
  const ExecRecord& at(int cand, std::size_t input) const;
  void set(int cand, std::size_t input, ExecRecord rec);
  bool complete() const;

  // Records for one candidate over the first `prefix` inputs (all when nullopt).
  std::vector<ExecRecord> row(int cand, std::optional<std::size_t> prefix = std::nullopt) const;

  std::vector<json> to_rows() const;  // ordered by (cand, input)
  static json to_row(const std::string& task_id, int cand, std::size_t input, const ExecRecord& rec);

 private:
  std::string task_id_;
  std::vector<int> candidates_;
  std::size_t d_ = 0;
  std::map<std::pair<int, std::size_t>, ExecRecord> cells_;
};

struct MatrixOptions {
  double timeout_secs = 5.0;
  std::size_t workers = 1;
  // Append-only journal; rows already present for this task are reused, not re-executed.
  std::optional<std::filesystem::path> journal;
};

ExecMatrix run_matrix(const Problem& problem, std::span<const Candidate> survivors, const InputSet& inputs,
                      const Sandbox& sandbox, const MatrixOptions& options);

// Loads every task's cells from a journal or finished matrix file.
std::map<std::string, std::vector<json>> load_matrix_rows(const std::filesystem::path& path);

}  // namespace semvote::sandbox
