#pragma once

// The solver/cuber contract used by collection, tuning, validation and final
// solving:
//   check(F, c, σ, budget) -> Sat(model) | Unsat | Unknown, with a cost
//   eval(F, c, σ)          -> cost of an earlier decided check (no re-solve)
//   cube(F, c, k, seed)    -> at most k cubes extending c

#include <atomic>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "sdac/cuber.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/mini_cdcl.hpp"
#include "sdac/outcome.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct BackendStats {
  std::uint64_t solves = 0;      // solver invocations actually performed
  std::uint64_t cache_hits = 0;  // checks answered from recorded outcomes
  std::uint64_t cube_calls = 0;

  bool operator==(const BackendStats&) const = default;
};

class Backend {
 public:
  Backend(StrategySpace space, CuberKind cuber) : space_(std::move(space)), cuber_(cuber) {}
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const StrategySpace& space() const noexcept { return space_; }
  CuberKind cuber() const noexcept { return cuber_; }

  // Thread-safe. Decided outcomes are recorded for eval(); deterministic
  // backends also answer repeated checks from the record (a decided cost c
  // implies Unknown for any budget below c).
  SolveOutcome check(const Formula& formula, const Cube& cube, const Strategy& strategy, Budget budget) {
    if (budget && *budget == 0) throw Error("check budget must be at least 1");
    auto key = make_key(formula, cube, strategy);
    if (deterministic()) {
      std::lock_guard lock(mutex_);
      if (auto it = decided_.find(key); it != decided_.end()) {
        ++stats_.cache_hits;
        if (!budget || it->second.cost <= *budget) return it->second;
        return {Status::Unknown, *budget, {}};
      }
      if (auto it = unknown_at_.find(key); it != unknown_at_.end() && budget && *budget <= it->second) {
        ++stats_.cache_hits;
        return {Status::Unknown, *budget, {}};
      }
    }
    SolveOutcome out = solve(formula, cube, strategy, budget);
    if (budget && out.cost > *budget) out.cost = *budget;
    std::lock_guard lock(mutex_);
    ++stats_.solves;
    if (out.decided()) {
      decided_.emplace(key, out);
    } else if (budget) {
      auto& seen = unknown_at_[key];
      seen = std::max(seen, *budget);
    }
    return out;
  }

  Cost eval(const Formula& formula, const Cube& cube, const Strategy& strategy) const {
    std::lock_guard lock(mutex_);
    auto it = decided_.find(make_key(formula, cube, strategy));
    if (it == decided_.end()) {
      throw NotYetSolved("eval before a decided check of cube [" + cube.to_string() + "] under " +
                         space_.to_string(strategy));
    }
    return it->second.cost;
  }

  CubeSplit cube(const Formula& formula, const Cube& base, std::size_t k, std::uint64_t seed) {
    (void)seed;  // both embedded cubers are deterministic
    {
      std::lock_guard lock(mutex_);
      ++stats_.cube_calls;
    }
    return split_cube(cuber_, formula, base, k);
  }

  BackendStats stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
  }

  // Drops every recorded outcome; stats are kept.
  void clear_records() {
    std::lock_guard lock(mutex_);
    decided_.clear();
    unknown_at_.clear();
  }

  virtual bool deterministic() const { return false; }

 protected:
  virtual SolveOutcome solve(const Formula& formula, const Cube& cube, const Strategy& strategy,
                             Budget budget) = 0;

 private:
  using Key = std::tuple<std::uint64_t, std::vector<std::int32_t>, std::vector<std::uint8_t>>;

  static Key make_key(const Formula& formula, const Cube& cube, const Strategy& strategy) {
    std::vector<std::int32_t> lits;
    lits.reserve(cube.size());
    for (Literal l : cube.literals()) lits.push_back(l.dimacs());
    return {formula.fingerprint(), std::move(lits), strategy.choice};
  }

  StrategySpace space_;
  CuberKind cuber_;
  mutable std::mutex mutex_;
  std::map<Key, SolveOutcome> decided_;
  std::map<Key, Cost> unknown_at_;
  BackendStats stats_;
};

class MiniCdclBackend final : public Backend {
 public:
  explicit MiniCdclBackend(StrategySpace space, CuberKind cuber = CuberKind::Lookahead)
      : Backend(std::move(space), cuber) {
    // Reject spaces with parameters or values the solver cannot interpret.
    decode_params(this->space(), this->space().default_strategy());
    if (this->space().cap() == 0) return;
    for (const auto& s : neighbors(this->space(), this->space().default_strategy(), 1)) decode_params(this->space(), s);
  }

  bool deterministic() const override { return true; }

 protected:
  SolveOutcome solve(const Formula& formula, const Cube& cube, const Strategy& strategy,
                     Budget budget) override {
    return mini_cdcl_solve(formula, decode_params(space(), strategy), budget, cube.literals());
  }
};

}  // namespace sdac
