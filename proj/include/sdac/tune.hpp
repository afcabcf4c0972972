#pragma once

// Metropolis-Hastings search over a strategy space, minimizing the PAR-capped
// total cost on a fixed set of tuning cubes.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sdac/backend.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"
#include "sdac/parallel.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct TuneConfig {
  std::size_t num_samples = 20;
  std::optional<double> beta;  // default 1 / cost(σ0)
  std::size_t proposal_k = 2;
  Cost per_cube_budget = 10000;
  Cost par_multiplier = 2;
  bool probe = true;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    if (num_samples < 1) throw ConfigError("tune: need at least one sample");
    if (beta && !(*beta > 0)) throw ConfigError("tune: beta must be positive");
    if (proposal_k < 1) throw ConfigError("tune: proposal_k must be >= 1");
    if (per_cube_budget < 1) throw ConfigError("tune: per-cube budget must be >= 1");
    if (par_multiplier < 1) throw ConfigError("tune: PAR multiplier must be >= 1");
  }
};

struct TrajectoryStep {
  Strategy strategy;
  Cost cost = 0;
  bool accepted = false;
};

struct TuneReport {
  Strategy best;
  Cost best_cost = 0;
  Cost default_cost = 0;
  double beta = 0;
  std::vector<TrajectoryStep> probes;      // σ0 first, then its 1-neighbors
  std::vector<TrajectoryStep> trajectory;  // entry 0 is the chain start
  std::size_t evaluations = 0;
};

inline double acceptance_probability(Cost cost_current, Cost cost_proposed, double beta) {
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  if (cost_proposed <= cost_current) return 1.0;
  const double delta = static_cast<double>(cost_current) - static_cast<double>(cost_proposed);
  return std::exp(beta * delta);
}

// Strategy -> cost with memoization; evaluations() counts distinct strategies.
class CostMemo {
 public:
  explicit CostMemo(std::function<Cost(const Strategy&)> fn) : fn_(std::move(fn)) {}

  Cost operator()(const Strategy& s) {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    Cost c = fn_(s);
    memo_.emplace(s, c);
    return c;
  }

  bool known(const Strategy& s) const { return memo_.count(s) != 0; }
  std::size_t evaluations() const noexcept { return memo_.size(); }

 private:
  std::function<Cost(const Strategy&)> fn_;
  std::unordered_map<Strategy, Cost, StrategyHash> memo_;
};

// One M-H chain: propose uniformly among the ≤k-flip neighbors, accept with
// acceptance_probability.
class MetropolisChain {
 public:
  MetropolisChain(const StrategySpace& space, Strategy start, Cost start_cost, std::size_t k, double beta,
                  std::uint64_t seed)
      : space_(space), state_(std::move(start)), cost_(start_cost), k_(k), beta_(beta), rng_(seed) {}

  std::optional<Strategy> propose() {
    auto it = neighbor_cache_.find(state_);
    if (it == neighbor_cache_.end()) it = neighbor_cache_.emplace(state_, neighbors(space_, state_, k_)).first;
    const auto& ns = it->second;
    if (ns.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, ns.size() - 1);
    return ns[pick(rng_)];
  }

  bool decide(const Strategy& proposal, Cost proposal_cost) {
    const double a = acceptance_probability(cost_, proposal_cost, beta_);
    const bool accept = a >= 1.0 || std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < a;
    if (accept) {
      state_ = proposal;
      cost_ = proposal_cost;
    }
    return accept;
  }

  const Strategy& state() const noexcept { return state_; }
  Cost cost() const noexcept { return cost_; }

 private:
  const StrategySpace& space_;
  Strategy state_;
  Cost cost_;
  std::size_t k_;
  double beta_;
  std::mt19937_64 rng_;
  std::unordered_map<Strategy, std::vector<Strategy>, StrategyHash> neighbor_cache_;
};

// Evaluates σ0 and then its 1-neighbors in enumeration order, at most
// `max_evals` strategies in total. Ties keep the earlier strategy.
inline std::pair<Strategy, Cost> probe_initialize(const StrategySpace& space, CostMemo& cost,
                                                  std::size_t max_evals, std::vector<TrajectoryStep>* probes = nullptr) {
  Strategy best = space.default_strategy();
  Cost best_cost = cost(best);
  if (probes) probes->push_back({best, best_cost, true});
  for (const auto& n : neighbors(space, best, 1)) {
    if (cost.evaluations() >= max_evals) break;
    Cost c = cost(n);
    if (probes) probes->push_back({n, c, false});
    if (c < best_cost) {
      best = n;
      best_cost = c;
    }
  }
  if (probes) {
    for (auto& p : *probes) p.accepted = p.strategy == best;
  }
  return {best, best_cost};
}

// Core search against an arbitrary cost oracle.
inline TuneReport tune_with_oracle(const StrategySpace& space, const std::function<Cost(const Strategy&)>& oracle,
                                   const TuneConfig& cfg) {
  cfg.validate();
  CostMemo cost(oracle);
  TuneReport report;
  const Strategy sigma0 = space.default_strategy();
  report.default_cost = cost(sigma0);
  report.beta = cfg.beta.value_or(report.default_cost > 0 ? 1.0 / static_cast<double>(report.default_cost) : 1.0);

  Strategy start = sigma0;
  Cost start_cost = report.default_cost;
  if (cfg.probe) {
    // Probing counts against t; with a small t it stops after t - 1 neighbors.
    std::tie(start, start_cost) = probe_initialize(space, cost, cfg.num_samples, &report.probes);
  } else {
    report.probes.push_back({sigma0, report.default_cost, true});
  }
  report.best = start;
  report.best_cost = start_cost;
  report.trajectory.push_back({start, start_cost, true});

  MetropolisChain chain(space, start, start_cost, cfg.proposal_k, report.beta, derive_seed(cfg.seed, 0x7e3u));
  // Memo hits are free, so a chain stuck on known states needs a separate stop.
  const std::size_t max_proposals = 100 * cfg.num_samples + 1000;
  for (std::size_t i = 0; i < max_proposals && cost.evaluations() < cfg.num_samples; ++i) {
    auto proposal = chain.propose();
    if (!proposal) break;
    Cost c = cost(*proposal);
    bool accepted = chain.decide(*proposal, c);
    report.trajectory.push_back({*proposal, c, accepted});
    if (c < report.best_cost) {
      report.best = *proposal;
      report.best_cost = c;
    }
  }
  report.evaluations = cost.evaluations();
  return report;
}

// PAR-capped costs of strategies over fixed tuning cubes, per cube and in total.
class CubeCostOracle {
 public:
  CubeCostOracle(const Formula& formula, std::vector<Cube> cubes, Backend& backend, Cost per_cube_budget,
                 Cost par_multiplier, std::size_t workers)
      : formula_(formula),
        cubes_(std::move(cubes)),
        backend_(backend),
        budget_(per_cube_budget),
        par_(par_multiplier),
        workers_(workers) {
    if (cubes_.empty()) throw ConfigError("tuning needs at least one cube");
  }

  Cost operator()(const Strategy& s) {
    auto& row = per_cube(s);
    Cost total = 0;
    for (const auto& o : row) total += o.decided() ? o.cost : par_ * budget_;
    return total;
  }

  // Outcome per tuning cube, solving on first use.
  const std::vector<SolveOutcome>& per_cube(const Strategy& s) {
    if (auto it = outcomes_.find(s); it != outcomes_.end()) return it->second;
    std::vector<SolveOutcome> row(cubes_.size());
    parallel_for(cubes_.size(), workers_,
                 [&](std::size_t i) { row[i] = backend_.check(formula_, cubes_[i], s, budget_); });
    order_.push_back(s);
    return outcomes_.emplace(s, std::move(row)).first->second;
  }

  const std::vector<Cube>& cubes() const noexcept { return cubes_; }
  const std::vector<Strategy>& evaluated() const noexcept { return order_; }
  Cost budget() const noexcept { return budget_; }

 private:
  const Formula& formula_;
  std::vector<Cube> cubes_;
  Backend& backend_;
  Cost budget_;
  Cost par_;
  std::size_t workers_;
  std::unordered_map<Strategy, std::vector<SolveOutcome>, StrategyHash> outcomes_;
  std::vector<Strategy> order_;
};

inline TuneReport tune(CubeCostOracle& oracle, const StrategySpace& space, const TuneConfig& cfg) {
  return tune_with_oracle(space, [&](const Strategy& s) { return oracle(s); }, cfg);
}

inline TuneReport tune(const Formula& formula, const std::vector<Cube>& tuning_cubes, Backend& backend,
                       const TuneConfig& cfg) {
  CubeCostOracle oracle(formula, tuning_cubes, backend, cfg.per_cube_budget, cfg.par_multiplier, cfg.workers);
  return tune(oracle, backend.space(), cfg);
}

}  // namespace sdac
