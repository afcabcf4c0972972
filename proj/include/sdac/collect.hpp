#pragma once

// Collection of difficulty-banded cubes from a shrinking/growing work queue.
//
// Each examination draws an unexamined cube and a strategy from the pool and
// checks it under the cube's budget max_cost · r^resplits:
//   Sat                      -> the formula is Sat, stop
//   Unsat, cost >= min_cost  -> collected (and removed from the queue)
//   Unsat, cost <  min_cost  -> solved, removed
//   Unknown                  -> deferred
// Deferred cubes are re-split only once every queued cube has been examined
// and the target is still unmet. An empty queue means the formula is Unsat.
//
// Examination order is a seeded permutation per pass, and the strategy drawn
// for position i of pass p depends only on (seed, p, i). Claims are evaluated
// in chunks of `workers` and committed strictly in order, so the outcome does
// not depend on the worker count.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sdac/backend.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"
#include "sdac/parallel.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct CubeRecord {
  std::uint64_t id = 0;
  Cube cube;
  std::uint32_t resplit_count = 0;
  std::optional<std::uint64_t> parent;
  Cost budget = 0;  // budget of the latest examination
  std::optional<SolveOutcome> outcome;
  std::optional<Strategy> strategy_used;
};

// Unsolved cubes keyed by id. Ids grow monotonically (initial partition first,
// re-split children after), so id order is the canonical queue order.
class CubeQueue {
 public:
  CubeQueue() = default;
  explicit CubeQueue(const std::vector<Cube>& initial) {
    for (const auto& c : initial) add(c, 0, std::nullopt);
  }

  CubeRecord& add(Cube cube, std::uint32_t resplits, std::optional<std::uint64_t> parent) {
    const auto id = next_id_++;
    auto& rec = records_[id];
    rec.id = id;
    rec.cube = std::move(cube);
    rec.resplit_count = resplits;
    rec.parent = parent;
    return rec;
  }

  void remove(std::uint64_t id) { records_.erase(id); }
  bool contains(std::uint64_t id) const { return records_.count(id) != 0; }
  CubeRecord& at(std::uint64_t id) { return records_.at(id); }
  const CubeRecord& at(std::uint64_t id) const { return records_.at(id); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::vector<std::uint64_t> ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_) out.push_back(id);
    return out;
  }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::map<std::uint64_t, CubeRecord> records_;
  std::uint64_t next_id_ = 0;
};

struct CollectConfig {
  std::size_t sample_target = 1;
  Cost min_cost = 0;
  Cost max_cost = 1;
  std::size_t online_cubes = 64;
  double budget_growth = 2.0;
  std::vector<Strategy> strategy_pool;
  std::uint64_t seed = 0;
  std::optional<std::size_t> step_limit;  // guard for termination tests

  void validate() const {
    if (sample_target < 1) throw ConfigError("collect: sample target must be >= 1");
    if (min_cost >= max_cost) throw ConfigError("collect: need min_cost < max_cost");
    if (online_cubes < 2) throw ConfigError("collect: online cube count must be >= 2");
    if (!(budget_growth >= 1.0)) throw ConfigError("collect: budget growth must be >= 1");
    if (strategy_pool.empty()) throw ConfigError("collect: empty strategy pool");
  }
};

// ceil(max_cost · r^resplits).
inline Cost effective_budget(const CollectConfig& cfg, std::uint32_t resplit_count) {
  const long double budget =
      std::ceil(static_cast<long double>(cfg.max_cost) *
                std::pow(static_cast<long double>(cfg.budget_growth), static_cast<long double>(resplit_count)));
  if (!(budget < static_cast<long double>(std::numeric_limits<Cost>::max() / 2))) {
    throw BudgetOverflow("budget " + std::to_string(cfg.max_cost) + " * " +
                         std::to_string(cfg.budget_growth) + "^" + std::to_string(resplit_count) +
                         " overflows the cost range");
  }
  return static_cast<Cost>(budget);
}

enum class Disposition { Collected, Solved, Deferred, Split, Sat };

inline std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::Collected: return "collected";
    case Disposition::Solved: return "solved";
    case Disposition::Deferred: return "deferred";
    case Disposition::Split: return "split";
    case Disposition::Sat: return "sat";
  }
  return "?";
}

struct CollectEvent {
  std::uint64_t cube_id = 0;
  Cube cube;
  std::uint32_t resplits = 0;
  std::optional<Strategy> strategy;  // empty for split events
  Status status = Status::Unknown;
  Cost cost = 0;
  Cost budget = 0;
  Disposition disposition = Disposition::Solved;
  std::size_t children = 0;
  double wall_ms = 0;
};

struct CollectedCube {
  CubeRecord record;
  Strategy strategy;
  Cost cost = 0;
};

struct CollectResult {
  Status status = Status::Unknown;
  Model model;
  std::vector<CollectedCube> collected;  // exactly sample_target iff Unknown
  std::vector<CollectEvent> events;      // commit order
  std::size_t steps = 0;                 // examinations committed
  std::size_t splits = 0;
};

namespace detail {

inline void verify_model(const Formula& formula, const Model& model) {
  if (!model.empty() && !satisfies(formula, model)) {
    throw Error("backend reported a model that violates the formula");
  }
}

}  // namespace detail

inline CollectResult collect(const Formula& formula, CubeQueue& queue, const CollectConfig& cfg,
                             Backend& backend, std::size_t workers = 1) {
  cfg.validate();
  workers = std::max<std::size_t>(1, workers);
  CollectResult result;
  std::vector<std::uint64_t> fresh = queue.ids();
  std::vector<std::uint64_t> deferred;

  auto finish_sat = [&](Model model) {
    detail::verify_model(formula, model);
    result.status = Status::Sat;
    result.model = std::move(model);
    result.collected.clear();
    return result;
  };

  auto finish_unsat = [&] {
    result.status = Status::Unsat;
    result.collected.clear();
    return result;
  };

  for (std::size_t pass = 0;; ++pass) {
    if (fresh.empty()) {
      // Lazy re-partitioning of everything that ran out of budget.
      for (auto id : deferred) {
        auto parent = queue.at(id);
        const auto started = std::chrono::steady_clock::now();
        CubeSplit split = backend.cube(formula, parent.cube, cfg.online_cubes, derive_seed(cfg.seed, 0x5b1u, id));
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        ++result.splits;
        CollectEvent ev{id, parent.cube, parent.resplit_count, std::nullopt, Status::Unknown, 0, 0,
                        Disposition::Split, split.cubes.size(), ms};
        queue.remove(id);
        if (split.decided == Status::Sat) {
          ev.status = Status::Sat;
          ev.disposition = Disposition::Sat;
          result.events.push_back(ev);
          return finish_sat(std::move(split.model));
        }
        if (split.decided == Status::Unsat) {
          ev.status = Status::Unsat;
          ev.disposition = Disposition::Solved;
        }
        result.events.push_back(ev);
        for (auto& child : split.cubes) {
          fresh.push_back(queue.add(std::move(child), parent.resplit_count + 1, id).id);
        }
      }
      deferred.clear();
      if (queue.empty()) {
        return finish_unsat();
      }
      continue;
    }

    std::vector<std::uint64_t> order = fresh;
    {
      std::mt19937_64 rng(derive_seed(cfg.seed, 0x9a55u, pass));
      std::shuffle(order.begin(), order.end(), rng);
    }
    fresh.clear();

    struct Claim {
      Strategy strategy;
      Cost budget = 0;
      SolveOutcome outcome;
      double wall_ms = 0;
    };
    for (std::size_t start = 0; start < order.size(); start += workers) {
      const std::size_t count = std::min(workers, order.size() - start);
      std::vector<Claim> claims(count);
      for (std::size_t j = 0; j < count; ++j) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x57a7u, pass, start + j));
        claims[j].strategy = sample_uniform(cfg.strategy_pool, rng);
        claims[j].budget = effective_budget(cfg, queue.at(order[start + j]).resplit_count);
      }
      parallel_for(count, workers, [&](std::size_t j) {
        const auto& rec = queue.at(order[start + j]);
        const auto started = std::chrono::steady_clock::now();
        claims[j].outcome = backend.check(formula, rec.cube, claims[j].strategy, claims[j].budget);
        claims[j].wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      });

      for (std::size_t j = 0; j < count; ++j) {
        auto& claim = claims[j];
        auto& rec = queue.at(order[start + j]);
        ++result.steps;
        if (cfg.step_limit && result.steps > *cfg.step_limit) {
          throw StepLimitExceeded("collect exceeded " + std::to_string(*cfg.step_limit) + " examinations");
        }
        rec.budget = claim.budget;
        rec.outcome = claim.outcome;
        rec.strategy_used = claim.strategy;
        CollectEvent ev{rec.id,          rec.cube,       rec.resplit_count,  claim.strategy,
                        claim.outcome.status, claim.outcome.cost, claim.budget, Disposition::Solved,
                        0,               claim.wall_ms};
        switch (claim.outcome.status) {
          case Status::Sat: {
            ev.disposition = Disposition::Sat;
            result.events.push_back(ev);
            queue.remove(rec.id);
            return finish_sat(std::move(claim.outcome.model));
          }
          case Status::Unsat:
            if (claim.outcome.cost >= cfg.min_cost) {
              ev.disposition = Disposition::Collected;
              result.collected.push_back({rec, claim.strategy, claim.outcome.cost});
            }
            result.events.push_back(ev);
            queue.remove(rec.id);
            break;
          case Status::Unknown:
            ev.disposition = Disposition::Deferred;
            result.events.push_back(ev);
            deferred.push_back(rec.id);
            break;
        }
        if (result.collected.size() == cfg.sample_target) {
          result.status = Status::Unknown;
          return result;
        }
      }
    }
    if (deferred.empty() && queue.empty()) {
      return finish_unsat();
    }
  }
}

}  // namespace sdac
