#include "semvote/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "semvote/error.hpp"

namespace semvote::sandbox {
namespace {

using Clock = std::chrono::steady_clock;

std::string resolve_program(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  const char* path = std::getenv("PATH");
  std::string dirs = path ? path : "/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= dirs.size()) {
    auto end = dirs.find(':', start);
    auto dir = dirs.substr(start, end == std::string::npos ? std::string::npos : end - start);
    auto candidate = (dir.empty() ? std::string(".") : dir) + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return name;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void kill_tree(pid_t pid) {
  ::kill(-pid, SIGKILL);
  ::kill(pid, SIGKILL);
}

}  // namespace

std::string_view to_string(ExecMode m) {
  switch (m) {
    case ExecMode::kExec: return "exec";
    case ExecMode::kParse: return "parse";
    case ExecMode::kCanon: return "canon";
    case ExecMode::kEvalTests: return "eval_tests";
  }
  return "exec";
}

std::string_view to_string(EvalVerdict v) {
  switch (v) {
    case EvalVerdict::kPass: return "pass";
    case EvalVerdict::kFail: return "fail";
    case EvalVerdict::kUnknown: return "unknown";
  }
  return "unknown";
}

std::string wire_request(const ExecJob& job) {
  json j;
  j["mode"] = std::string(to_string(job.mode));
  j["source"] = job.source;
  if (job.mode == ExecMode::kExec || job.mode == ExecMode::kEvalTests) j["entry_point"] = job.entry_point;
  if (job.mode == ExecMode::kExec) j["input_expr"] = job.input_expr;
  if (job.mode == ExecMode::kEvalTests) j["test_suite"] = job.test_suite;
  return j.dump();
}

RunnerSpec RunnerSpec::python(const std::filesystem::path& script) {
  RunnerSpec spec;
  spec.command = {"python3", "-S", script.string()};
  return spec;
}

Sandbox::Sandbox(RunnerSpec spec) : spec_(std::move(spec)) {
  if (spec_.command.empty()) throw Error(ErrorKind::kConfig, "runner command is empty");
  resolved_program_ = resolve_program(spec_.command.front());
  // A worker that exits before reading its job must not take the orchestrator down.
  static const bool sigpipe_ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;
}

WorkerResult Sandbox::invoke(const ExecJob& job) const {
  WorkerResult result;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(job.timeout_secs));
  const std::string request = wire_request(job);

  // Everything the child touches is prepared before fork.
  std::vector<std::string> args = spec_.command;
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  const char* path_env = std::getenv("PATH");
  std::vector<std::string> env = {std::string("PATH=") + (path_env ? path_env : "/usr/bin:/bin"), "PYTHONHASHSEED=0",
                                  "PYTHONDONTWRITEBYTECODE=1", "PYTHONIOENCODING=utf-8", "LC_ALL=C.UTF-8"};
  std::vector<char*> envp;
  for (auto& e : env) envp.push_back(e.data());
  envp.push_back(nullptr);
  const rlim_t as_limit = spec_.address_space_bytes;

  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    result.diagnostic = std::string("pipe: ") + std::strerror(errno);
    return result;
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    result.diagnostic = std::string("pipe: ") + std::strerror(errno);
    return result;
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    result.diagnostic = std::string("fork: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    if (as_limit) {
      rlimit rl{as_limit, as_limit};
      ::setrlimit(RLIMIT_AS, &rl);
    }
    rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    ::execve(resolved_program_.c_str(), argv.data(), envp.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  int in_fd = in_pipe[1];
  int out_fd = out_pipe[0];
  set_nonblocking(in_fd);
  set_nonblocking(out_fd);

  std::string output;
  std::size_t written = 0;
  bool timed_out = false;
  bool too_large = false;
  while (out_fd >= 0) {
    auto now = Clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {out_fd, POLLIN, 0};
    if (in_fd >= 0) fds[nfds++] = {in_fd, POLLOUT, 0};
    auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(wait_ms, 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (in_fd >= 0 && nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = ::write(in_fd, request.data() + written, request.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN) written = request.size();
      if (written >= request.size()) {
        ::close(in_fd);
        in_fd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[8192];
      ssize_t n = ::read(out_fd, buf, sizeof buf);
      if (n > 0) {
        output.append(buf, static_cast<std::size_t>(n));
        if (output.size() > spec_.max_output_bytes) {
          too_large = true;
          break;
        }
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        ::close(out_fd);
        out_fd = -1;
      }
    }
  }
  if (in_fd >= 0) ::close(in_fd);
  if (out_fd >= 0) ::close(out_fd);

  int status = 0;
  if (timed_out || too_large) {
    kill_tree(pid);
    ::waitpid(pid, &status, 0);
  } else {
    // Stdout closed; give the worker until the deadline plus grace to exit.
    const auto reap_deadline = deadline + spec_.kill_grace;
    while (true) {
      pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) break;
      if (Clock::now() >= reap_deadline) {
        kill_tree(pid);
        ::waitpid(pid, &status, 0);
        timed_out = Clock::now() >= deadline;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    ::kill(-pid, SIGKILL);  // stray grandchildren
  }
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);

  if (too_large) {
    result.end = WorkerEnd::kOutputTooLarge;
    return result;
  }
  if (timed_out) {
    result.end = WorkerEnd::kTimeout;
    return result;
  }
  try {
    auto doc = json::parse(output);
    auto st = doc.at("status").get<std::string>();
    if (st != "ok" && st != "err") throw std::runtime_error("bad status " + st);
    result.status = st;
    result.value = doc.at("value").get<std::string>();
    result.end = WorkerEnd::kCompleted;
  } catch (const std::exception& e) {
    result.end = WorkerEnd::kInfraFailure;
    result.diagnostic = "unreadable runner output (exit status " + std::to_string(status) + "): " + e.what();
  }
  return result;
}

ExecRecord Sandbox::run_one(const ExecJob& job) const {
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto r = invoke(job);
    switch (r.end) {
      case WorkerEnd::kTimeout: return ExecRecord::timeout();
      case WorkerEnd::kOutputTooLarge: return ExecRecord::err("OutputTooLarge");
      case WorkerEnd::kCompleted:
        if (r.status == "ok") return ExecRecord::ok(r.value);
        return ExecRecord::err(r.value.empty() ? "UnknownError" : r.value);
      case WorkerEnd::kInfraFailure:
        spdlog::warn("sandbox infrastructure failure (attempt {}): {}", attempt + 1, r.diagnostic);
        break;
    }
  }
  return ExecRecord::err("SandboxError");
}

bool Sandbox::check_syntax(const std::string& source) const {
  auto r = invoke({ExecMode::kParse, source, "", "", "", 30.0});
  if (r.end != WorkerEnd::kCompleted) {
    spdlog::warn("parse job did not complete ({}); treating candidate as invalid", r.diagnostic);
    return false;
  }
  return r.status == "ok";
}

std::optional<std::string> Sandbox::canonical_ast_key(const std::string& source) const {
  auto r = invoke({ExecMode::kCanon, source, "", "", "", 30.0});
  if (r.end != WorkerEnd::kCompleted) {
    spdlog::warn("canon job did not complete ({})", r.diagnostic);
    return std::nullopt;
  }
  if (r.status != "ok") return std::nullopt;
  return r.value;
}

EvalVerdict Sandbox::eval_tests(const std::string& source, const std::string& entry_point,
                                const std::string& test_suite, double timeout_secs) const {
  ExecJob job{ExecMode::kEvalTests, source, entry_point, "", test_suite, timeout_secs};
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto r = invoke(job);
    if (r.end == WorkerEnd::kCompleted) return r.status == "ok" && r.value == "pass" ? EvalVerdict::kPass : EvalVerdict::kFail;
    if (r.end == WorkerEnd::kTimeout || r.end == WorkerEnd::kOutputTooLarge) return EvalVerdict::kFail;
    spdlog::warn("evaluation infrastructure failure (attempt {}): {}", attempt + 1, r.diagnostic);
  }
  return EvalVerdict::kUnknown;
}

std::string Sandbox::interpreter_version() const {
  std::string cmd = "'" + resolved_program_ + "' --version 2>&1";
  std::string out;
  if (FILE* p = ::popen(cmd.c_str(), "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, p)) out += buf;
    ::pclose(p);
  }
  return std::string(trim(out));
}

// ---------------------------------------------------------------------------
// Source assembly

namespace {

std::size_t indent_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

bool starts_def_of(std::string_view line, const std::string& name) {
  auto t = trim(line);
  if (t.starts_with("async ")) t = trim(t.substr(6));
  if (!t.starts_with("def ")) return false;
  t = trim(t.substr(4));
  return t.starts_with(name) && t.size() > name.size() &&
         (t[name.size()] == '(' || t[name.size()] == ' ');
}

// Index one past the signature's last line (parenthesis-balanced, ending in ':').
std::size_t signature_end(const std::vector<std::string>& lines, std::size_t def_line) {
  int depth = 0;
  for (std::size_t i = def_line; i < lines.size(); ++i) {
    for (char c : lines[i]) {
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') --depth;
    }
    auto t = trim(lines[i]);
    if (depth <= 0 && !t.empty() && t.back() == ':') return i + 1;
  }
  return def_line + 1;
}

std::vector<std::string> strip_fences(const std::vector<std::string>& lines) {
  auto is_fence = [](const std::string& l) { return trim(l).starts_with("```"); };
  auto first = std::find_if(lines.begin(), lines.end(), is_fence);
  if (first == lines.end()) return lines;
  auto second = std::find_if(first + 1, lines.end(), is_fence);
  if (second == lines.end()) {
    std::vector<std::string> out;
    std::copy_if(lines.begin(), lines.end(), std::back_inserter(out), [&](const auto& l) { return !is_fence(l); });
    return out;
  }
  return {first + 1, second};
}

// Leading docstring directly after a repeated signature.
std::size_t skip_docstring(const std::vector<std::string>& lines, std::size_t from) {
  std::size_t i = from;
  while (i < lines.size() && is_blank(lines[i])) ++i;
  if (i >= lines.size()) return from;
  auto t = trim(lines[i]);
  for (std::string_view q : {"\"\"\"", "'''"}) {
    if (!t.starts_with(q)) continue;
    if (t.size() >= 6 && t.substr(3).find(q) != std::string_view::npos) return i + 1;
    for (std::size_t k = i + 1; k < lines.size(); ++k) {
      if (lines[k].find(q) != std::string::npos) return k + 1;
    }
    return from;
  }
  return from;
}

std::vector<std::string> dedent(std::vector<std::string> lines) {
  std::size_t common = std::string::npos;
  for (const auto& l : lines)
    if (!is_blank(l)) common = std::min(common, indent_of(l));
  if (common == std::string::npos) common = 0;
  for (auto& l : lines) l = is_blank(l) ? std::string() : l.substr(common);
  return lines;
}

}  // namespace

Assembly assemble_source_text(const Problem& problem, const std::string& body_raw) {
  const auto prompt_lines = split_lines(problem.prompt);
  std::size_t def_line = prompt_lines.size();
  for (std::size_t i = 0; i < prompt_lines.size(); ++i) {
    if (starts_def_of(prompt_lines[i], problem.entry_point)) {
      def_line = i;
      break;
    }
  }
  std::string header;
  std::string signature;
  if (def_line < prompt_lines.size()) {
    for (std::size_t i = 0; i < def_line; ++i) header += prompt_lines[i] + "\n";
    for (std::size_t i = def_line; i < signature_end(prompt_lines, def_line); ++i) signature += prompt_lines[i] + "\n";
  } else {
    signature = "def " + problem.entry_point + "(*args):\n";
  }

  auto body = strip_fences(split_lines(body_raw));
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (starts_def_of(body[i], problem.entry_point)) {
      auto after = skip_docstring(body, signature_end(body, i));
      body.assign(body.begin() + static_cast<std::ptrdiff_t>(after), body.end());
      break;
    }
  }
  while (!body.empty() && is_blank(body.front())) body.erase(body.begin());
  while (!body.empty() && is_blank(body.back())) body.pop_back();

  Assembly out;
  if (body.empty()) {
    out.source = header + signature;
    out.empty_body = true;
    return out;
  }
  // A first line stripped of its indentation while the rest kept theirs.
  if (body.size() > 1 && indent_of(body[0]) == 0 && trim(body[0]).back() != ':') {
    std::vector<std::string> rest(body.begin() + 1, body.end());
    bool rest_indented = std::all_of(rest.begin(), rest.end(), [](const auto& l) { return is_blank(l) || indent_of(l) > 0; });
    if (rest_indented) {
      rest = dedent(rest);
      body.resize(1);
      body.insert(body.end(), rest.begin(), rest.end());
    }
  }
  body = dedent(body);
  std::string text;
  for (const auto& l : body) text += l.empty() ? "\n" : "    " + l + "\n";
  out.source = header + signature + text;
  return out;
}

Candidate assemble_source(const Problem& problem, const std::string& body_raw, int index, const Sandbox& sandbox) {
  auto assembly = assemble_source_text(problem, body_raw);
  Candidate c;
  c.index = index;
  c.body_raw = body_raw;
  c.source = std::move(assembly.source);
  c.is_syntactically_valid = !assembly.empty_body && sandbox.check_syntax(c.source);
  return c;
}

// ---------------------------------------------------------------------------
// Matrix

ExecMatrix::ExecMatrix(std::string task_id, std::vector<int> candidates, std::size_t d)
    : task_id_(std::move(task_id)), candidates_(std::move(candidates)), d_(d) {}

bool ExecMatrix::has(int cand, std::size_t input) const { return cells_.count({cand, input}) > 0; }

const ExecRecord& ExecMatrix::at(int cand, std::size_t input) const {
  auto it = cells_.find({cand, input});
  if (it == cells_.end()) {
    throw Error(ErrorKind::kStructural, "matrix cell missing: cand " + std::to_string(cand) + ", input " +
                                            std::to_string(input) + " (task " + task_id_ + ")");
  }
  return it->second;
}

void ExecMatrix::set(int cand, std::size_t input, ExecRecord rec) { cells_[{cand, input}] = std::move(rec); }

bool ExecMatrix::complete() const { return cells_.size() == candidates_.size() * d_; }

std::vector<ExecRecord> ExecMatrix::row(int cand, std::optional<std::size_t> prefix) const {
  std::size_t d = prefix ? std::min(*prefix, d_) : d_;
  std::vector<ExecRecord> out;
  out.reserve(d);
  for (std::size_t j = 0; j < d; ++j) out.push_back(at(cand, j));
  return out;
}

json ExecMatrix::to_row(const std::string& task_id, int cand, std::size_t input, const ExecRecord& rec) {
  json j;
  j["task_id"] = task_id;
  j["cand"] = cand;
  j["input"] = input;
  j["status"] = std::string(to_string(rec.status));
  j["payload"] = rec.payload;
  return j;
}

std::vector<json> ExecMatrix::to_rows() const {
  std::vector<json> rows;
  for (const auto& [key, rec] : cells_) rows.push_back(to_row(task_id_, key.first, key.second, rec));
  return rows;
}

std::map<std::string, std::vector<json>> load_matrix_rows(const std::filesystem::path& path) {
  std::map<std::string, std::vector<json>> out;
  if (!std::filesystem::exists(path)) return out;
  for (auto& row : read_jsonl(path)) out[row.at("task_id").get<std::string>()].push_back(std::move(row));
  return out;
}

ExecMatrix run_matrix(const Problem& problem, std::span<const Candidate> survivors, const InputSet& inputs,
                      const Sandbox& sandbox, const MatrixOptions& options) {
  std::vector<int> ids;
  for (const auto& c : survivors) ids.push_back(c.index);
  ExecMatrix matrix(problem.task_id, ids, inputs.size());

  if (options.journal) {
    auto existing = load_matrix_rows(*options.journal);
    for (const auto& row : existing[problem.task_id]) {
      int cand = row.at("cand").get<int>();
      auto input = row.at("input").get<std::size_t>();
      if (input < inputs.size() && std::find(ids.begin(), ids.end(), cand) != ids.end()) {
        matrix.set(cand, input, {parse_status(row.at("status").get<std::string>()), row.at("payload").get<std::string>()});
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> todo;
  for (std::size_t c = 0; c < survivors.size(); ++c)
    for (std::size_t j = 0; j < inputs.size(); ++j)
      if (!matrix.has(survivors[c].index, j)) todo.emplace_back(c, j);

  std::mutex mu;
  std::ofstream journal;
  if (options.journal) {
    std::filesystem::create_directories(options.journal->parent_path());
    journal.open(*options.journal, std::ios::app | std::ios::binary);
  }
  parallel_for(todo.size(), options.workers, [&](std::size_t k) {
    const auto& [c, j] = todo[k];
    const Candidate& cand = survivors[c];
    ExecJob job{ExecMode::kExec, cand.source, problem.entry_point, inputs.inputs[j].expr, "", options.timeout_secs};
    auto rec = sandbox.run_one(job);
    std::lock_guard lock(mu);
    if (journal.is_open()) {
      journal << ExecMatrix::to_row(problem.task_id, cand.index, j, rec).dump() << '\n';
      journal.flush();
    }
    matrix.set(cand.index, j, std::move(rec));
  });
  return matrix;
}

}  // namespace semvote::sandbox
