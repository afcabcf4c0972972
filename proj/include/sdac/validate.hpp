#pragma once

// Accept or reject a learned strategy on held-out cubes, and solve cubes under
// the resulting policy.

#include <string>
#include <variant>
#include <vector>

#include "sdac/backend.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"
#include "sdac/parallel.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct SingleStrategy {
  Strategy strategy;

  bool operator==(const SingleStrategy&) const = default;
};

// Try `first` under `first_budget`; on Unknown run `fallback` unlimited.
struct SequentialPortfolio {
  Strategy first;
  Cost first_budget = 0;
  Strategy fallback;

  bool operator==(const SequentialPortfolio&) const = default;
};

using FinalPolicy = std::variant<SingleStrategy, SequentialPortfolio>;

inline std::string describe(const FinalPolicy& policy, const StrategySpace& space) {
  if (auto* single = std::get_if<SingleStrategy>(&policy)) return "single(" + space.to_string(single->strategy) + ")";
  const auto& p = std::get<SequentialPortfolio>(policy);
  return "portfolio(" + space.to_string(p.first) + " for " + std::to_string(p.first_budget) + ", then " +
         space.to_string(p.fallback) + ")";
}

struct ValidationCube {
  std::uint64_t id = 0;
  Cube cube;
  Cost budget = 0;                   // budget the cube was collected under
  std::optional<Cost> learned_cost;  // known when collected under the learned strategy
};

struct ValidationRow {
  std::uint64_t cube_id = 0;
  Cube cube;
  Cost cost_learned = 0;  // PAR-capped
  Cost cost_default = 0;  // PAR-capped
  Status default_status = Status::Unknown;
};

struct ValidationReport {
  Cost cost_learned = 0;
  Cost cost_default = 0;
  bool accepted = false;
  std::vector<ValidationRow> per_cube;
};

inline FinalPolicy make_portfolio(const Strategy& first, Cost first_budget, const Strategy& fallback) {
  if (first == fallback) throw ConfigError("portfolio legs must differ");
  if (first_budget == 0) throw ConfigError("portfolio budget must be positive");
  return SequentialPortfolio{first, first_budget, fallback};
}

inline std::pair<FinalPolicy, ValidationReport> validate(const Formula& formula, const std::vector<ValidationCube>& cubes,
                                                         const Strategy& learned, const Strategy& sigma0,
                                                         Backend& backend, Cost first_budget, Cost par_multiplier,
                                                         std::size_t workers = 1) {
  if (cubes.empty()) throw ConfigError("validation needs at least one cube");
  if (learned == sigma0) throw ConfigError("validation of the default strategy against itself");
  ValidationReport report;
  report.per_cube.resize(cubes.size());
  auto capped = [&](const SolveOutcome& o, Cost budget) { return o.decided() ? o.cost : par_multiplier * budget; };
  parallel_for(cubes.size(), workers, [&](std::size_t i) {
    const auto& vc = cubes[i];
    auto& row = report.per_cube[i];
    row.cube_id = vc.id;
    row.cube = vc.cube;
    row.cost_learned = vc.learned_cost ? *vc.learned_cost
                                       : capped(backend.check(formula, vc.cube, learned, vc.budget), vc.budget);
    auto d = backend.check(formula, vc.cube, sigma0, vc.budget);
    row.default_status = d.status;
    row.cost_default = capped(d, vc.budget);
  });
  for (const auto& row : report.per_cube) {
    report.cost_learned += row.cost_learned;
    report.cost_default += row.cost_default;
  }
  report.accepted = report.cost_learned < report.cost_default;
  FinalPolicy policy =
      report.accepted ? FinalPolicy{SingleStrategy{learned}} : make_portfolio(learned, first_budget, sigma0);
  return {policy, report};
}

// Outcome of solving one cube under a policy; costs of both legs are summed.
struct PolicyOutcome {
  SolveOutcome outcome;
  Strategy decided_by;
  bool fell_back = false;
};

inline PolicyOutcome solve_with_policy(const Formula& formula, const Cube& cube, const FinalPolicy& policy,
                                       Backend& backend) {
  if (auto* single = std::get_if<SingleStrategy>(&policy)) {
    return {backend.check(formula, cube, single->strategy, kUnlimited), single->strategy, false};
  }
  const auto& p = std::get<SequentialPortfolio>(policy);
  auto first = backend.check(formula, cube, p.first, p.first_budget);
  if (first.decided()) return {first, p.first, false};
  auto second = backend.check(formula, cube, p.fallback, kUnlimited);
  second.cost += first.cost;
  return {second, p.fallback, true};
}

}  // namespace sdac
