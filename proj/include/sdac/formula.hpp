#pragma once

// CNF formulas, cubes, DIMACS / iCNF serialization and a truth-table oracle.
//
// Variables are 1-based in every external format and 0-based inside the
// library; Literal::from_dimacs / Literal::dimacs are the only crossing points.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdac/error.hpp"

namespace sdac {

using Var = std::uint32_t;

class Literal {
 public:
  constexpr Literal() = default;

  static Literal from_dimacs(std::int64_t value) {
    if (value == 0 || value > INT32_MAX || value < -INT32_MAX) {
      throw Error("literal value out of range: " + std::to_string(value));
    }
    Literal lit;
    lit.value_ = static_cast<std::int32_t>(value);
    return lit;
  }
  static Literal positive(Var v) { return from_dimacs(static_cast<std::int64_t>(v) + 1); }
  static Literal negative(Var v) { return from_dimacs(-(static_cast<std::int64_t>(v) + 1)); }

  constexpr std::int32_t dimacs() const noexcept { return value_; }
  constexpr Var var() const noexcept { return static_cast<Var>(std::abs(value_) - 1); }
  constexpr bool is_negative() const noexcept { return value_ < 0; }
  constexpr Literal operator~() const noexcept {
    Literal lit;
    lit.value_ = -value_;
    return lit;
  }
  // Dense encoding 2*var + sign, used for watch lists and assignment tables.
  constexpr std::uint32_t code() const noexcept { return 2 * var() + (is_negative() ? 1u : 0u); }

  constexpr auto operator<=>(const Literal&) const = default;

 private:
  std::int32_t value_ = 1;
};

using Clause = std::vector<Literal>;

// Full assignment indexed by 0-based variable.
using Model = std::vector<bool>;

inline bool literal_true(const Model& model, Literal lit) {
  return lit.var() < model.size() && model[lit.var()] != lit.is_negative();
}

struct Formula {
  Var num_vars = 0;
  std::vector<Clause> clauses;

  bool operator==(const Formula&) const = default;

  bool has_empty_clause() const {
    return std::any_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.empty(); });
  }

  // Order-sensitive FNV-1a over the clause database; used as a cache key.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x;
      h *= 1099511628211ull;
    };
    mix(num_vars);
    for (const auto& clause : clauses) {
      mix(0x9e3779b97f4a7c15ull);
      for (Literal lit : clause) mix(static_cast<std::uint32_t>(lit.dimacs()));
    }
    return h;
  }
};

inline bool satisfies(const Formula& formula, const Model& model) {
  return std::all_of(formula.clauses.begin(), formula.clauses.end(), [&](const Clause& clause) {
    return std::any_of(clause.begin(), clause.end(),
                       [&](Literal lit) { return literal_true(model, lit); });
  });
}

// A conjunction of literals over distinct variables. The empty cube is "true".
class Cube {
 public:
  Cube() = default;

  explicit Cube(std::vector<Literal> literals) : literals_(std::move(literals)) {
    std::vector<Var> vars;
    vars.reserve(literals_.size());
    for (Literal lit : literals_) vars.push_back(lit.var());
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
      throw InvalidCube("cube mentions a variable twice: " + to_string());
    }
  }

  static Cube from_dimacs(std::initializer_list<int> values) {
    std::vector<Literal> lits;
    for (int v : values) lits.push_back(Literal::from_dimacs(v));
    return Cube(std::move(lits));
  }

  std::span<const Literal> literals() const noexcept { return literals_; }
  std::size_t size() const noexcept { return literals_.size(); }
  bool empty() const noexcept { return literals_.empty(); }

  bool mentions(Var v) const {
    return std::any_of(literals_.begin(), literals_.end(), [v](Literal l) { return l.var() == v; });
  }

  Cube extended(std::span<const Literal> more) const {
    std::vector<Literal> lits = literals_;
    lits.insert(lits.end(), more.begin(), more.end());
    return Cube(std::move(lits));
  }

  // Space-separated DIMACS literals; doubles as a stable cube identifier.
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < literals_.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(literals_[i].dimacs());
    }
    return out;
  }

  auto operator<=>(const Cube&) const = default;
  bool operator==(const Cube&) const = default;

 private:
  std::vector<Literal> literals_;
};

// Appends every cube literal as a unit clause.
inline Formula conjoin(const Formula& formula, const Cube& cube) {
  Formula out = formula;
  for (Literal lit : cube.literals()) {
    if (lit.var() >= out.num_vars) {
      throw Error("cube literal " + std::to_string(lit.dimacs()) + " exceeds variable count");
    }
    out.clauses.push_back({lit});
  }
  return out;
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<std::int64_t> parse_int(std::string_view token) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

// Shared clause-line state machine for DIMACS and iCNF bodies.
class ClauseAccumulator {
 public:
  explicit ClauseAccumulator(std::optional<Var> bound) : bound_(bound) {}

  void feed(std::string_view token, std::size_t line_no) {
    auto value = parse_int(token);
    if (!value) {
      throw ParseError(ParseError::Kind::MalformedToken, line_no,
                       "not an integer: '" + std::string(token) + "'");
    }
    if (*value == 0) {
      clauses_.push_back(std::move(pending_));
      pending_.clear();
      return;
    }
    auto magnitude = static_cast<std::uint64_t>(*value < 0 ? -*value : *value);
    if ((bound_ && magnitude > *bound_) || magnitude > INT32_MAX) {
      throw ParseError(ParseError::Kind::LiteralOutOfRange, line_no,
                       "literal " + std::to_string(*value) + " exceeds declared variable count");
    }
    max_var_ = std::max<Var>(max_var_, static_cast<Var>(magnitude));
    pending_.push_back(Literal::from_dimacs(*value));
    pending_line_ = line_no;
  }

  bool has_pending() const { return !pending_.empty(); }
  std::size_t pending_line() const { return pending_line_; }
  Var max_var() const { return max_var_; }
  std::vector<Clause> take() { return std::move(clauses_); }

 private:
  std::optional<Var> bound_;
  std::vector<Clause> clauses_;
  Clause pending_;
  std::size_t pending_line_ = 0;
  Var max_var_ = 0;
};

inline void append_clause(std::string& out, std::span<const Literal> lits) {
  for (Literal lit : lits) {
    out += std::to_string(lit.dimacs());
    out += ' ';
  }
  out += "0\n";
}

}  // namespace detail

// Parses DIMACS CNF. A clause-count mismatch against the header is reported
// through `warnings` (when given) and otherwise ignored.
inline Formula parse_dimacs(std::string_view text, std::vector<std::string>* warnings = nullptr) {
  detail::LineReader reader(text);
  std::string_view line;
  std::optional<std::int64_t> declared_vars;
  std::int64_t declared_clauses = 0;
  std::optional<detail::ClauseAccumulator> body;

  while (reader.next(line)) {
    if (detail::is_blank(line)) continue;
    if (line.front() == 'c') continue;
    if (line.front() == '%') break;  // SATLIB trailer
    if (line.front() == 'p') {
      auto tokens = detail::split_ws(line);
      if (declared_vars || tokens.size() != 4 || tokens[0] != "p" || tokens[1] != "cnf") {
        throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(),
                         "expected 'p cnf <vars> <clauses>'");
      }
      declared_vars = detail::parse_int(tokens[2]);
      auto clauses = detail::parse_int(tokens[3]);
      if (!declared_vars || !clauses || *declared_vars < 0 || *clauses < 0 ||
          *declared_vars > INT32_MAX) {
        throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(),
                         "bad header counts");
      }
      declared_clauses = *clauses;
      body.emplace(static_cast<Var>(*declared_vars));
      continue;
    }
    if (!body) {
      throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(),
                       "clause before 'p cnf' header");
    }
    for (auto token : detail::split_ws(line)) body->feed(token, reader.line_no());
  }

  if (!body) throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(), "missing header");
  if (body->has_pending()) {
    throw ParseError(ParseError::Kind::UnterminatedClause, body->pending_line(),
                     "clause not terminated by 0 at end of input");
  }
  Formula formula;
  formula.num_vars = static_cast<Var>(*declared_vars);
  formula.clauses = body->take();
  if (warnings && static_cast<std::int64_t>(formula.clauses.size()) != declared_clauses) {
    warnings->push_back("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                        std::to_string(formula.clauses.size()));
  }
  return formula;
}

inline std::string write_dimacs(const Formula& formula) {
  std::string out = "p cnf " + std::to_string(formula.num_vars) + " " +
                    std::to_string(formula.clauses.size()) + "\n";
  for (const auto& clause : formula.clauses) detail::append_clause(out, clause);
  return out;
}

struct IcnfProblem {
  Formula formula;
  std::vector<Cube> cubes;

  bool operator==(const IcnfProblem&) const = default;
};

inline std::string write_icnf(const Formula& formula, std::span<const Cube> cubes) {
  Var max_used = 0;
  for (const auto& clause : formula.clauses)
    for (Literal lit : clause) max_used = std::max(max_used, lit.var() + 1);
  for (const auto& cube : cubes) {
    for (Literal lit : cube.literals()) {
      if (lit.var() >= formula.num_vars) {
        throw Error("cube literal " + std::to_string(lit.dimacs()) + " exceeds variable count");
      }
    }
  }
  std::string out = "p inccnf\n";
  if (formula.num_vars > max_used) out += "c num_vars " + std::to_string(formula.num_vars) + "\n";
  for (const auto& clause : formula.clauses) detail::append_clause(out, clause);
  for (const auto& cube : cubes) {
    out += "a ";
    detail::append_clause(out, cube.literals());
  }
  return out;
}

inline IcnfProblem parse_icnf(std::string_view text) {
  detail::LineReader reader(text);
  std::string_view line;
  bool header = false;
  Var declared_vars = 0;
  detail::ClauseAccumulator body(std::nullopt);
  IcnfProblem problem;

  while (reader.next(line)) {
    if (detail::is_blank(line)) continue;
    if (line.front() == 'c') {
      auto tokens = detail::split_ws(line);
      if (tokens.size() == 3 && tokens[1] == "num_vars") {
        if (auto n = detail::parse_int(tokens[2]); n && *n >= 0 && *n <= INT32_MAX)
          declared_vars = static_cast<Var>(*n);
      }
      continue;
    }
    if (line.front() == 'p') {
      auto tokens = detail::split_ws(line);
      if (header || tokens.size() != 2 || tokens[0] != "p" || tokens[1] != "inccnf") {
        throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(), "expected 'p inccnf'");
      }
      header = true;
      continue;
    }
    if (!header) {
      throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(),
                       "content before 'p inccnf' header");
    }
    if (line.front() == 'a') {
      if (body.has_pending()) {
        throw ParseError(ParseError::Kind::UnterminatedClause, body.pending_line(),
                         "clause not terminated before cube line");
      }
      auto tokens = detail::split_ws(line);
      if (tokens.empty() || tokens[0] != "a" || tokens.size() < 2 || tokens.back() != "0") {
        throw ParseError(ParseError::Kind::MalformedCubeLine, reader.line_no(),
                         "cube line must be 'a <lits> 0'");
      }
      std::vector<Literal> lits;
      for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
        auto value = detail::parse_int(tokens[i]);
        if (!value || *value == 0 || *value > INT32_MAX || *value < -INT32_MAX) {
          throw ParseError(ParseError::Kind::MalformedCubeLine, reader.line_no(),
                           "bad cube literal '" + std::string(tokens[i]) + "'");
        }
        lits.push_back(Literal::from_dimacs(*value));
        declared_vars = std::max<Var>(declared_vars, lits.back().var() + 1);
      }
      try {
        problem.cubes.emplace_back(std::move(lits));
      } catch (const InvalidCube& e) {
        throw ParseError(ParseError::Kind::MalformedCubeLine, reader.line_no(), e.what());
      }
      continue;
    }
    for (auto token : detail::split_ws(line)) body.feed(token, reader.line_no());
  }
  if (!header) throw ParseError(ParseError::Kind::MalformedHeader, reader.line_no(), "missing header");
  if (body.has_pending()) {
    throw ParseError(ParseError::Kind::UnterminatedClause, body.pending_line(),
                     "clause not terminated by 0 at end of input");
  }
  problem.formula.num_vars = std::max(declared_vars, body.max_var());
  problem.formula.clauses = body.take();
  return problem;
}

inline constexpr Var kBruteForceMaxVars = 24;

// Exhaustive truth-table check. Returns a model or nullopt for Unsat.
inline std::optional<Model> brute_force_sat(const Formula& formula) {
  if (formula.num_vars > kBruteForceMaxVars) {
    throw TooManyVariables("brute-force oracle supports at most " +
                           std::to_string(kBruteForceMaxVars) + " variables, got " +
                           std::to_string(formula.num_vars));
  }
  struct Mask {
    std::uint32_t pos = 0;
    std::uint32_t neg = 0;
  };
  std::vector<Mask> masks;
  masks.reserve(formula.clauses.size());
  for (const auto& clause : formula.clauses) {
    Mask m;
    for (Literal lit : clause) (lit.is_negative() ? m.neg : m.pos) |= 1u << lit.var();
    masks.push_back(m);
  }
  const std::uint64_t total = std::uint64_t{1} << formula.num_vars;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    const auto a = static_cast<std::uint32_t>(bits);
    bool ok = true;
    for (const Mask& m : masks) {
      if (((a & m.pos) | (~a & m.neg)) == 0) {
        ok = false;
        break;
      }
    }
    if (ok) {
      Model model(formula.num_vars);
      for (Var v = 0; v < formula.num_vars; ++v) model[v] = (a >> v) & 1u;
      return model;
    }
  }
  return std::nullopt;
}

}  // namespace sdac
