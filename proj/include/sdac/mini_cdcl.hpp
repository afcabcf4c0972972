#pragma once

// A small, deterministic CDCL solver whose cost metric is the number of
// conflicts. Two-watched-literal propagation, 1-UIP learning, non-chronological
// backjumping, optional VSIDS-style bumping, Luby restarts and phase saving.
// Learned clauses are never deleted, so the conflict count tracks the work
// done under a given parameter setting and is not muddied by reduction policy.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct MiniSolverParams {
  bool bump = true;           // dynamic activity bumping; off freezes scores
  bool tumble = true;         // scrambled initial order; off keeps file order
  bool initial_phase = true;  // polarity of the first decision on each variable
  bool force_phase = false;   // always decide initial_phase (disables saving)
  int stable = 1;             // 0 Luby restarts, 1 alternating epochs, 2 none

  bool operator==(const MiniSolverParams&) const = default;
};

// Maps a strategy's tokens onto solver settings. Parameters the solver does
// not know are rejected; parameters absent from the space keep their default.
inline MiniSolverParams decode_params(const StrategySpace& space, const Strategy& strategy) {
  if (!space.conforms(strategy)) throw DecodeError("strategy does not conform to its space");
  MiniSolverParams p;
  auto flag = [](const std::string& name, const std::string& v) {
    if (v == "1") return true;
    if (v == "0") return false;
    throw DecodeError("parameter '" + name + "' expects 0 or 1, got '" + v + "'");
  };
  for (std::size_t i = 0; i < space.params().size(); ++i) {
    const auto& name = space.params()[i].name;
    const auto& v = space.value(strategy, i);
    if (name == "bump") {
      p.bump = flag(name, v);
    } else if (name == "tumble") {
      p.tumble = flag(name, v);
    } else if (name == "phase") {
      p.initial_phase = flag(name, v);
    } else if (name == "forcephase") {
      p.force_phase = flag(name, v);
    } else if (name == "stable") {
      if (v != "0" && v != "1" && v != "2") throw DecodeError("stable expects 0, 1 or 2, got '" + v + "'");
      p.stable = v[0] - '0';
    } else {
      throw DecodeError("embedded solver has no parameter '" + name + "'");
    }
  }
  return p;
}

namespace detail {

inline std::uint64_t luby(std::uint64_t i) {
  // Luby sequence 1 1 2 1 1 2 4 ..., 0-based.
  std::uint64_t size = 1, seq = 0;
  while (size < i + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != i) {
    size = (size - 1) >> 1;
    --seq;
    i = i % size;
  }
  return std::uint64_t{1} << seq;
}

// Indexed binary max-heap over variables keyed by activity, ties to the
// lowest variable index.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& activity) : act_(activity) {}

  void reset(Var n) {
    heap_.clear();
    pos_.assign(n, -1);
  }
  bool contains(Var v) const { return pos_[v] >= 0; }
  bool empty() const { return heap_.empty(); }

  void insert(Var v) {
    if (contains(v)) return;
    pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(heap_.size() - 1);
  }
  void increased(Var v) {
    if (contains(v)) up(static_cast<std::size_t>(pos_[v]));
  }
  Var pop() {
    Var top = heap_.front();
    move(heap_.back(), 0);
    heap_.pop_back();
    pos_[top] = -1;
    if (!heap_.empty()) down(0);
    return top;
  }

 private:
  bool before(Var a, Var b) const { return act_[a] > act_[b] || (act_[a] == act_[b] && a < b); }
  void move(Var v, std::size_t i) {
    heap_[i] = v;
    pos_[v] = static_cast<int>(i);
  }
  void up(std::size_t i) {
    Var v = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!before(v, heap_[parent])) break;
      move(heap_[parent], i);
      i = parent;
    }
    move(v, i);
  }
  void down(std::size_t i) {
    Var v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && before(heap_[child + 1], heap_[child])) ++child;
      if (!before(heap_[child], v)) break;
      move(heap_[child], i);
      i = child;
    }
    move(v, i);
  }

  const std::vector<double>& act_;
  std::vector<Var> heap_;
  std::vector<int> pos_;
};

}  // namespace detail

class MiniCdcl {
 public:
  MiniCdcl(const Formula& formula, std::span<const Literal> units, const MiniSolverParams& params)
      : params_(params), num_vars_(formula.num_vars), heap_(activity_) {
    const Var n = num_vars_;
    value_.assign(2 * std::size_t{n}, kUndef);
    level_.assign(n, 0);
    reason_.assign(n, kNoReason);
    seen_.assign(n, 0);
    saved_phase_.assign(n, params_.initial_phase);
    activity_.assign(n, 0.0);
    watches_.resize(2 * std::size_t{n});
    heap_.reset(n);

    if (params_.tumble) {
      // Deterministic scramble of the initial decision order; scores stay far
      // below one bump so any conflict-driven activity dominates.
      std::vector<Var> order(n);
      for (Var v = 0; v < n; ++v) order[v] = v;
      auto key = [](Var v) {
        std::uint64_t x = (std::uint64_t{v} + 1) * 0x9e3779b97f4a7c15ull;
        x ^= x >> 29;
        x *= 0xbf58476d1ce4e5b9ull;
        return x ^ (x >> 32);
      };
      std::sort(order.begin(), order.end(), [&](Var a, Var b) { return key(a) < key(b); });
      for (Var r = 0; r < n; ++r) activity_[order[r]] = 1e-6 * static_cast<double>(n - r) / (n + 1.0);
    }
    for (Var v = 0; v < n; ++v) heap_.insert(v);

    for (const auto& clause : formula.clauses) add_clause(clause);
    for (Literal lit : units) add_clause(std::span<const Literal>(&lit, 1));
  }

  SolveOutcome solve(Budget budget) {
    if (!ok_) return {Status::Unsat, 0, {}};
    std::uint64_t restart_index = 0;
    std::uint64_t since_restart = 0;
    for (;;) {
      int confl = propagate();
      if (confl != kNoReason) {
        if (trail_lim_.empty()) return {Status::Unsat, conflicts_, {}};
        if (budget && conflicts_ >= *budget) return {Status::Unknown, *budget, {}};
        ++conflicts_;
        ++since_restart;
        int bt = analyze(confl);
        backtrack(bt);
        if (learnt_.size() == 1) {
          enqueue(learnt_[0], kNoReason);
        } else {
          int ci = static_cast<int>(clauses_.size());
          clauses_.push_back(learnt_);
          watches_[learnt_[0]].push_back(ci);
          watches_[learnt_[1]].push_back(ci);
          enqueue(learnt_[0], ci);
        }
        if (params_.bump) var_inc_ /= kDecay;
        continue;
      }
      if (restart_due(restart_index, since_restart)) {
        backtrack(0);
        ++restart_index;
        since_restart = 0;
      }
      Var next = pick_branch_var();
      if (next == kNoVar) {
        Model model(num_vars_);
        for (Var v = 0; v < num_vars_; ++v) model[v] = value_[2 * v] == kTrue;
        return {Status::Sat, conflicts_, std::move(model)};
      }
      trail_lim_.push_back(trail_.size());
      bool phase = params_.force_phase ? params_.initial_phase : saved_phase_[next];
      enqueue(2 * next + (phase ? 0u : 1u), kNoReason);
    }
  }

 private:
  static constexpr std::int8_t kUndef = -1, kFalse = 0, kTrue = 1;
  static constexpr int kNoReason = -1;
  static constexpr Var kNoVar = ~Var{0};
  static constexpr double kDecay = 0.95;
  static constexpr std::uint64_t kLubyUnit = 64;
  static constexpr std::uint64_t kEpoch = 1000;

  void add_clause(std::span<const Literal> lits) {
    if (!ok_) return;
    std::vector<std::uint32_t> c;
    c.reserve(lits.size());
    for (Literal l : lits) c.push_back(l.code());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
      if ((c[i] ^ 1u) == c[i - 1]) return;  // tautology
    // Level-0 simplification against already-fixed units.
    std::erase_if(c, [&](std::uint32_t l) { return value_[l] == kFalse; });
    if (std::any_of(c.begin(), c.end(), [&](std::uint32_t l) { return value_[l] == kTrue; })) return;
    if (c.empty()) {
      ok_ = false;
      return;
    }
    if (c.size() == 1) {
      enqueue(c[0], kNoReason);
      if (propagate() != kNoReason) ok_ = false;
      return;
    }
    int ci = static_cast<int>(clauses_.size());
    clauses_.push_back(std::move(c));
    watches_[clauses_.back()[0]].push_back(ci);
    watches_[clauses_.back()[1]].push_back(ci);
  }

  void enqueue(std::uint32_t lit, int reason) {
    Var v = lit >> 1;
    value_[lit] = kTrue;
    value_[lit ^ 1u] = kFalse;
    level_[v] = static_cast<int>(trail_lim_.size());
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  int propagate() {
    while (qhead_ < trail_.size()) {
      const std::uint32_t false_lit = trail_[qhead_++] ^ 1u;
      auto& ws = watches_[false_lit];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        const int ci = ws[i++];
        auto& c = clauses_[ci];
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (value_[c[0]] == kTrue) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value_[c[k]] != kFalse) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (value_[c[0]] == kFalse) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c[0], ci);
      }
      ws.resize(j);
    }
    return kNoReason;
  }

  int analyze(int confl) {
    learnt_.assign(1, 0);
    const int current = static_cast<int>(trail_lim_.size());
    int path = 0;
    std::uint32_t p = 0;
    bool have_p = false;
    std::size_t idx = trail_.size();
    do {
      const auto& c = clauses_[confl];
      for (std::size_t j = have_p ? 1 : 0; j < c.size(); ++j) {
        const Var v = c[j] >> 1;
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        bump(v);
        if (level_[v] >= current) {
          ++path;
        } else {
          learnt_.push_back(c[j]);
        }
      }
      do {
        --idx;
      } while (!seen_[trail_[idx] >> 1]);
      p = trail_[idx];
      have_p = true;
      confl = reason_[p >> 1];
      seen_[p >> 1] = 0;
      --path;
    } while (path > 0);
    learnt_[0] = p ^ 1u;

    int bt = 0;
    if (learnt_.size() > 1) {
      std::size_t best = 1;
      for (std::size_t i = 2; i < learnt_.size(); ++i)
        if (level_[learnt_[i] >> 1] > level_[learnt_[best] >> 1]) best = i;
      std::swap(learnt_[1], learnt_[best]);
      bt = level_[learnt_[1] >> 1];
    }
    for (std::size_t i = 1; i < learnt_.size(); ++i) seen_[learnt_[i] >> 1] = 0;
    return bt;
  }

  void bump(Var v) {
    if (!params_.bump) return;
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    heap_.increased(v);
  }

  void backtrack(int level) {
    if (static_cast<int>(trail_lim_.size()) <= level) return;
    const std::size_t keep = trail_lim_[level];
    for (std::size_t i = trail_.size(); i-- > keep;) {
      const std::uint32_t lit = trail_[i];
      const Var v = lit >> 1;
      if (!params_.force_phase) saved_phase_[v] = (lit & 1u) == 0;
      value_[lit] = kUndef;
      value_[lit ^ 1u] = kUndef;
      reason_[v] = kNoReason;
      heap_.insert(v);
    }
    trail_.resize(keep);
    trail_lim_.resize(level);
    qhead_ = keep;
  }

  bool restart_due(std::uint64_t restart_index, std::uint64_t since_restart) const {
    if (trail_lim_.empty()) return false;
    switch (params_.stable) {
      case 0: return since_restart >= kLubyUnit * detail::luby(restart_index);
      case 1:
        if ((conflicts_ / kEpoch) % 2 == 1) return false;
        return since_restart >= kLubyUnit * detail::luby(restart_index);
      default: return false;
    }
  }

  Var pick_branch_var() {
    while (!heap_.empty()) {
      Var v = heap_.pop();
      if (value_[2 * v] == kUndef) return v;
    }
    return kNoVar;
  }

  MiniSolverParams params_;
  Var num_vars_;
  bool ok_ = true;
  std::uint64_t conflicts_ = 0;
  double var_inc_ = 1.0;

  std::vector<std::int8_t> value_;  // indexed by literal code
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<char> seen_;
  std::vector<bool> saved_phase_;
  std::vector<double> activity_;
  std::vector<std::vector<std::uint32_t>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::size_t> trail_lim_;
  std::vector<std::uint32_t> learnt_;
  std::size_t qhead_ = 0;
  detail::VarHeap heap_;
};

// One budgeted solve of formula ∧ units.
inline SolveOutcome mini_cdcl_solve(const Formula& formula, const MiniSolverParams& params,
                                    Budget conflict_budget, std::span<const Literal> units = {}) {
  MiniCdcl solver(formula, units, params);
  return solver.solve(conflict_budget);
}

}  // namespace sdac
