#pragma once

// Partitioning procedures. Both cubers split F ∧ base on ⌊log2 k⌋ variables,
// dropping branches that unit propagation refutes; they differ only in how the
// branch variable is chosen.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"

namespace sdac {

// Unit propagation with an undo trail; no learning, no decisions heuristics.
class UnitPropagator {
 public:
  explicit UnitPropagator(const Formula& formula)
      : formula_(formula), value_(2 * std::size_t{formula.num_vars}, kUndef), occurs_(2 * std::size_t{formula.num_vars}) {
    for (std::size_t ci = 0; ci < formula.clauses.size(); ++ci) {
      const auto& clause = formula.clauses[ci];
      if (clause.empty()) conflict_ = true;
      for (Literal lit : clause) occurs_[lit.code()].push_back(static_cast<std::uint32_t>(ci));
    }
    for (const auto& clause : formula.clauses) {
      if (clause.size() == 1 && !assign(clause[0])) break;
    }
    root_conflict_ = conflict_;
  }

  bool in_conflict() const { return conflict_; }
  std::size_t trail_size() const { return trail_.size(); }

  std::optional<bool> value(Var v) const {
    auto x = value_[2 * std::size_t{v}];
    if (x == kUndef) return std::nullopt;
    return x == kTrue;
  }

  // Asserts `lit` and propagates. Returns false on conflict; the state then
  // stays conflicting until undo() rewinds past the assertion.
  bool assign(Literal lit) {
    if (conflict_) return false;
    auto cur = value_[lit.code()];
    if (cur == kTrue) return true;
    if (cur == kFalse) {
      conflict_ = true;
      return false;
    }
    set(lit.code());
    while (head_ < trail_.size()) {
      const std::uint32_t false_lit = trail_[head_++] ^ 1u;
      for (auto ci : occurs_[false_lit]) {
        const auto& clause = formula_.clauses[ci];
        std::uint32_t unassigned = 0, last = 0;
        bool satisfied = false;
        for (Literal l : clause) {
          auto v = value_[l.code()];
          if (v == kTrue) {
            satisfied = true;
            break;
          }
          if (v == kUndef) {
            ++unassigned;
            last = l.code();
          }
        }
        if (satisfied) continue;
        if (unassigned == 0) {
          conflict_ = true;
          return false;
        }
        if (unassigned == 1) set(last);
      }
    }
    return true;
  }

  void undo(std::size_t trail_size) {
    while (trail_.size() > trail_size) {
      auto code = trail_.back();
      trail_.pop_back();
      value_[code] = kUndef;
      value_[code ^ 1u] = kUndef;
    }
    head_ = trail_.size();
    conflict_ = root_conflict_;
  }

  bool clause_satisfied(const Clause& clause) const {
    for (Literal l : clause)
      if (value_[l.code()] == kTrue) return true;
    return false;
  }

  bool all_satisfied() const {
    for (const auto& clause : formula_.clauses)
      if (!clause_satisfied(clause)) return false;
    return true;
  }

  // Variables occurring in a clause not yet satisfied, ascending.
  std::vector<Var> open_vars() const {
    std::vector<char> mark(formula_.num_vars, 0);
    for (const auto& clause : formula_.clauses) {
      if (clause_satisfied(clause)) continue;
      for (Literal l : clause)
        if (value_[l.code()] == kUndef) mark[l.var()] = 1;
    }
    std::vector<Var> out;
    for (Var v = 0; v < formula_.num_vars; ++v)
      if (mark[v]) out.push_back(v);
    return out;
  }

  Model model() const {
    Model m(formula_.num_vars);
    for (Var v = 0; v < formula_.num_vars; ++v) m[v] = value_[2 * std::size_t{v}] == kTrue;
    return m;
  }

 private:
  static constexpr std::int8_t kUndef = -1, kFalse = 0, kTrue = 1;

  void set(std::uint32_t code) {
    value_[code] = kTrue;
    value_[code ^ 1u] = kFalse;
    trail_.push_back(code);
  }

  const Formula& formula_;
  std::vector<std::int8_t> value_;
  std::vector<std::vector<std::uint32_t>> occurs_;
  std::vector<std::uint32_t> trail_;
  std::size_t head_ = 0;
  bool conflict_ = false;
  bool root_conflict_ = false;
};

enum class CuberKind { Lookahead, UnitClause };

inline std::string_view to_string(CuberKind kind) {
  return kind == CuberKind::Lookahead ? "lookahead" : "unit";
}

inline CuberKind parse_cuber_kind(std::string_view name) {
  if (name == "lookahead") return CuberKind::Lookahead;
  if (name == "unit") return CuberKind::UnitClause;
  throw ConfigError("unknown cuber '" + std::string(name) + "' (expected lookahead or unit)");
}

// Result of a partitioning call. When unit propagation alone decides F ∧ base
// the cube list is empty and `decided` carries the verdict (with a model for Sat).
struct CubeSplit {
  std::vector<Cube> cubes;
  std::optional<Status> decided;
  Model model;
};

namespace detail {

inline std::size_t split_depth(std::size_t k) {
  std::size_t d = 0;
  while ((std::size_t{2} << d) <= k) ++d;
  return d;
}

// Highest props⁺·props⁻ + props⁺ + props⁻, ties to the lowest index. A failed
// literal scores as if it forced the whole formula, so it is split on first
// and the refuted side is pruned.
inline std::optional<Var> lookahead_pick(UnitPropagator& up, const std::vector<Var>& candidates,
                                         Var num_vars) {
  std::optional<Var> best;
  std::uint64_t best_score = 0;
  const std::size_t base = up.trail_size();
  for (Var v : candidates) {
    std::uint64_t props[2];
    for (int side = 0; side < 2; ++side) {
      bool ok = up.assign(side == 0 ? Literal::positive(v) : Literal::negative(v));
      props[side] = ok ? up.trail_size() - base : num_vars + 1;
      up.undo(base);
    }
    std::uint64_t score = props[0] * props[1] + props[0] + props[1];
    if (!best || score > best_score) {
      best = v;
      best_score = score;
    }
  }
  return best;
}

inline void split_rec(UnitPropagator& up, CuberKind kind, Var num_vars, std::size_t depth,
                      std::vector<Literal>& path, std::vector<Cube>& out) {
  if (depth == 0) {
    out.emplace_back(path);
    return;
  }
  auto open = up.open_vars();
  if (open.empty()) {
    // Every clause holds already; further splitting adds nothing.
    out.emplace_back(path);
    return;
  }
  Var v = kind == CuberKind::Lookahead ? *lookahead_pick(up, open, num_vars) : open.front();
  for (Literal lit : {Literal::positive(v), Literal::negative(v)}) {
    const std::size_t mark = up.trail_size();
    if (up.assign(lit)) {
      path.push_back(lit);
      split_rec(up, kind, num_vars, depth - 1, path, out);
      path.pop_back();
    }
    up.undo(mark);
  }
}

}  // namespace detail

// Splits F ∧ base into at most k cubes, each extending `base`. The union of the
// returned sub-problems is equisatisfiable with F ∧ base: only branches refuted
// by unit propagation are dropped.
inline CubeSplit split_cube(CuberKind kind, const Formula& formula, const Cube& base, std::size_t k) {
  if (k < 2) throw Error("cube split needs k > 1");
  CubeSplit result;
  UnitPropagator up(formula);
  bool ok = !up.in_conflict();
  for (Literal lit : base.literals()) {
    if (!ok) break;
    ok = up.assign(lit);
  }
  if (!ok) {
    result.decided = Status::Unsat;
    return result;
  }
  if (up.all_satisfied()) {
    result.decided = Status::Sat;
    result.model = up.model();
    return result;
  }
  std::vector<Literal> path;
  std::vector<Cube> tails;
  detail::split_rec(up, kind, formula.num_vars, detail::split_depth(k), path, tails);
  if (tails.empty()) {
    result.decided = Status::Unsat;
    return result;
  }
  for (const auto& tail : tails) result.cubes.push_back(base.extended(tail.literals()));
  return result;
}

}  // namespace sdac
