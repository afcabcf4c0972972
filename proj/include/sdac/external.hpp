#pragma once

// Backend that shells out to an external SAT solver per check.
//
// Command templates are split on whitespace and each token is expanded:
//   {formula_file}  path of the DIMACS file holding F ∧ cube
//   {budget}        conflict budget; a token containing it is dropped when the
//                   budget is unlimited
//   {params}        one token per non-default parameter, "--NAME=VALUE" unless
//                   param_templates overrides it ({name}/{value} placeholders)
//   {param:NAME}    the current value of NAME
// Output (stdout and stderr merged) is classified line by line with the status
// patterns; the cost is the first capture group of the last line matching
// cost_pattern.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sdac/backend.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct ExternalConfig {
  std::string command;
  std::map<std::string, std::string> param_templates;
  std::string sat_pattern = "^s SATISFIABLE";
  std::string unsat_pattern = "^s UNSATISFIABLE";
  std::string cost_pattern = R"(^c conflicts:\s*([0-9]+))";
  std::set<int> unknown_exit_codes{0};
  std::filesystem::path workdir;  // empty: system temp directory
  std::chrono::milliseconds timeout{60'000};
  bool keep_files = false;

  void validate() const {
    if (command.find("{formula_file}") == std::string::npos) {
      throw ConfigError("external command needs a {formula_file} placeholder");
    }
    for (const auto* pat : {&sat_pattern, &unsat_pattern, &cost_pattern}) {
      try {
        std::regex re(*pat);
        if (pat == &cost_pattern && re.mark_count() != 1) {
          throw ConfigError("cost pattern needs exactly one capture group");
        }
      } catch (const std::regex_error& e) {
        throw ConfigError("bad pattern '" + *pat + "': " + e.what());
      }
    }
    if (timeout.count() <= 0) throw ConfigError("external timeout must be positive");
  }
};

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal
  std::string output;
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace detail

// Expands the command template into argv-style tokens (unquoted).
inline std::vector<std::string> expand_command(const ExternalConfig& cfg, const StrategySpace& space,
                                               const Strategy& strategy, const std::string& formula_file,
                                               Budget budget) {
  std::vector<std::string> out;
  std::istringstream in(cfg.command);
  for (std::string token; in >> token;) {
    if (token == "{params}") {
      for (std::size_t i = 0; i < space.params().size(); ++i) {
        if (strategy.choice.at(i) == 0) continue;
        const auto& name = space.params()[i].name;
        auto it = cfg.param_templates.find(name);
        std::string flag = it != cfg.param_templates.end() ? it->second : "--{name}={value}";
        detail::replace_all(flag, "{name}", name);
        detail::replace_all(flag, "{value}", space.value(strategy, i));
        out.push_back(flag);
      }
      continue;
    }
    if (token.find("{budget}") != std::string::npos) {
      if (!budget) continue;
      detail::replace_all(token, "{budget}", std::to_string(*budget));
    }
    detail::replace_all(token, "{formula_file}", formula_file);
    for (std::size_t pos; (pos = token.find("{param:")) != std::string::npos;) {
      auto close = token.find('}', pos);
      if (close == std::string::npos) throw ConfigError("unterminated {param:...} in '" + token + "'");
      auto name = token.substr(pos + 7, close - pos - 7);
      token.replace(pos, close - pos + 1, space.value(strategy, space.index_of(name)));
    }
    out.push_back(token);
  }
  return out;
}

// Runs `/bin/sh -c command` in its own process group. On timeout the whole
// group is killed and Timeout is thrown.
inline ProcessResult run_process(const std::string& command, std::chrono::milliseconds timeout,
                                 const std::filesystem::path& cwd = {}) {
  int fds[2];
  if (pipe(fds) != 0) throw SpawnFailure(std::string("pipe: ") + std::strerror(errno));
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw SpawnFailure(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(126);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(fds[1]);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool timed_out = false;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{fds[0], POLLIN, 0};
    int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    ssize_t n = read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  if (timed_out) kill(-pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) {
    throw Timeout("solver exceeded " + std::to_string(timeout.count()) + " ms: " + command);
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (result.exit_code == 127) throw SpawnFailure("could not run: " + command);
  return result;
}

// Classifies solver output. `num_vars` sizes the model built from "v" lines.
inline SolveOutcome parse_solver_output(const ExternalConfig& cfg, const ProcessResult& proc, Var num_vars,
                                        Budget budget) {
  const std::regex sat_re(cfg.sat_pattern), unsat_re(cfg.unsat_pattern), cost_re(cfg.cost_pattern);
  bool sat = false, unsat = false;
  std::optional<Cost> cost;
  std::vector<std::int64_t> values;
  for (const auto& line : detail::split_lines(proc.output)) {
    std::smatch m;
    if (std::regex_search(line, sat_re)) sat = true;
    if (std::regex_search(line, unsat_re)) unsat = true;
    if (std::regex_search(line, m, cost_re)) {
      try {
        cost = std::stoull(m[1].str());
      } catch (const std::exception&) {
        throw UnparseableOutput("cost '" + m[1].str() + "' is not a number");
      }
    }
    if (line.size() >= 2 && line[0] == 'v' && line[1] == ' ') {
      std::istringstream in(line.substr(2));
      for (std::int64_t lit; in >> lit;) values.push_back(lit);
    }
  }
  if (sat && unsat) throw UnparseableOutput("solver reported both SATISFIABLE and UNSATISFIABLE");
  if (!sat && !unsat) {
    if (!cfg.unknown_exit_codes.count(proc.exit_code)) {
      throw UnparseableOutput("no status line and unexpected exit code " + std::to_string(proc.exit_code));
    }
    return {Status::Unknown, budget.value_or(cost.value_or(0)), {}};
  }
  if (!cost) throw UnparseableOutput("no cost found in solver output");
  SolveOutcome out{sat ? Status::Sat : Status::Unsat, *cost, {}};
  if (sat && !values.empty()) {
    out.model.assign(num_vars, false);
    for (auto lit : values) {
      if (lit == 0) continue;
      auto v = static_cast<std::uint64_t>(lit < 0 ? -lit : lit) - 1;
      if (v >= num_vars) throw UnparseableOutput("model mentions variable " + std::to_string(v + 1));
      out.model[v] = lit > 0;
    }
  }
  return out;
}

class ExternalBackend final : public Backend {
 public:
  ExternalBackend(StrategySpace space, ExternalConfig cfg, CuberKind cuber = CuberKind::Lookahead)
      : Backend(std::move(space), cuber), cfg_(std::move(cfg)) {
    cfg_.validate();
    auto base = cfg_.workdir.empty() ? std::filesystem::temp_directory_path() : cfg_.workdir;
    std::string pattern = (base / "sdac-run-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw SpawnFailure("cannot create scratch directory under " + base.string());
    dir_ = pattern;
  }

  ~ExternalBackend() override {
    std::error_code ec;
    std::filesystem::remove(dir_, ec);  // only succeeds when nothing was kept
  }

  const std::filesystem::path& scratch_dir() const noexcept { return dir_; }
  const ExternalConfig& config() const noexcept { return cfg_; }

 protected:
  SolveOutcome solve(const Formula& formula, const Cube& cube, const Strategy& strategy, Budget budget) override {
    const auto file = dir_ / ("call-" + std::to_string(counter_++) + ".cnf");
    {
      std::ofstream out(file);
      out << write_dimacs(conjoin(formula, cube));
      if (!out) throw SpawnFailure("cannot write " + file.string());
    }
    std::string command;
    for (const auto& tok : expand_command(cfg_, space(), strategy, file.string(), budget)) {
      if (!command.empty()) command += ' ';
      command += detail::shell_quote(tok);
    }
    SolveOutcome out = parse_solver_output(cfg_, run_process(command, cfg_.timeout), formula.num_vars, budget);
    if (!cfg_.keep_files) std::filesystem::remove(file);
    return out;
  }

 private:
  ExternalConfig cfg_;
  std::filesystem::path dir_;
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace sdac
