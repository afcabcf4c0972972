#include <gtest/gtest.h>

#include <map>
#include <random>

#include "sdac/backend.hpp"
#include "sdac/benchmarks.hpp"
#include "sdac/validate.hpp"

using namespace sdac;

namespace {

// Unsat at a cost looked up by (cube's first literal, strategy text).
class TableBackend final : public Backend {
 public:
  TableBackend() : Backend(mini_cdcl_strategy_space(), CuberKind::Lookahead) {}
  bool deterministic() const override { return false; }
  std::map<std::pair<int, std::string>, Cost> cost;
  std::vector<std::pair<std::string, Budget>> calls;

 protected:
  SolveOutcome solve(const Formula&, const Cube& cube, const Strategy& s, Budget budget) override {
    const auto name = space().to_string(s);
    calls.push_back({name, budget});
    const Cost need = cost.at({cube.literals()[0].dimacs(), name});
    if (budget && *budget < need) return {Status::Unknown, *budget, {}};
    return {Status::Unsat, need, {}};
  }
};

const Formula kEmpty = parse_dimacs("p cnf 4 0\n");

std::vector<ValidationCube> vcubes(int n, Cost budget) {
  std::vector<ValidationCube> out;
  for (int i = 1; i <= n; ++i) out.push_back({std::uint64_t(i), Cube::from_dimacs({i}), budget, std::nullopt});
  return out;
}

}  // namespace

TEST(Validate, LearnedDominates) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  auto learned = b.space().make({{"bump", "0"}});
  for (int i = 1; i <= 3; ++i) {
    b.cost[{i, "default"}] = 50;
    b.cost[{i, "bump=0"}] = 10;
  }
  auto [policy, report] = validate(kEmpty, vcubes(3, 100), learned, s0, b, 100, 2);
  EXPECT_TRUE(report.accepted);
  EXPECT_EQ(report.cost_learned, 30u);
  EXPECT_EQ(report.cost_default, 150u);
  EXPECT_EQ(policy, FinalPolicy{SingleStrategy{learned}});
}

TEST(Validate, TieRejects) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  auto learned = b.space().make({{"bump", "0"}});
  b.cost[{1, "default"}] = 30;
  b.cost[{1, "bump=0"}] = 10;
  b.cost[{2, "default"}] = 10;
  b.cost[{2, "bump=0"}] = 30;
  auto [policy, report] = validate(kEmpty, vcubes(2, 100), learned, s0, b, 77, 2);
  EXPECT_FALSE(report.accepted);
  EXPECT_EQ(policy, (FinalPolicy{SequentialPortfolio{learned, 77, s0}}));
}

TEST(Validate, ReusesLearnedCostsAndParCapsDefault) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  auto learned = b.space().make({{"tumble", "0"}});
  b.cost[{1, "default"}] = 500;  // over budget 100: PAR-capped at 200
  b.cost[{2, "default"}] = 90;
  auto cubes = vcubes(2, 100);
  cubes[0].learned_cost = 60;
  cubes[1].learned_cost = 80;
  auto [policy, report] = validate(kEmpty, cubes, learned, s0, b, 100, 2);
  EXPECT_EQ(report.cost_learned, 140u);
  EXPECT_EQ(report.cost_default, 290u);
  EXPECT_TRUE(report.accepted);
  for (const auto& [name, budget] : b.calls) EXPECT_EQ(name, "default");
  EXPECT_EQ(report.per_cube[0].default_status, Status::Unknown);
}

TEST(Validate, RejectsBadInputs) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  EXPECT_THROW(validate(kEmpty, {}, b.space().make({{"bump", "0"}}), s0, b, 1, 2), ConfigError);
  EXPECT_THROW(validate(kEmpty, vcubes(1, 10), s0, s0, b, 1, 2), ConfigError);
  EXPECT_THROW(make_portfolio(s0, 10, s0), ConfigError);
  EXPECT_THROW(make_portfolio(b.space().make({{"bump", "0"}}), 0, s0), ConfigError);
}

TEST(SolveWithPolicy, SingleRunsUnlimited) {
  TableBackend b;
  auto s = b.space().make({{"bump", "0"}});
  b.cost[{1, "bump=0"}] = 12;
  auto r = solve_with_policy(kEmpty, Cube::from_dimacs({1}), SingleStrategy{s}, b);
  EXPECT_EQ(r.outcome.cost, 12u);
  EXPECT_FALSE(r.fell_back);
  ASSERT_EQ(b.calls.size(), 1u);
  EXPECT_EQ(b.calls[0].second, kUnlimited);
}

TEST(SolveWithPolicy, PortfolioShortCircuits) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  auto s = b.space().make({{"bump", "0"}});
  b.cost[{1, "bump=0"}] = 40;
  auto r = solve_with_policy(kEmpty, Cube::from_dimacs({1}), make_portfolio(s, 50, s0), b);
  EXPECT_EQ(r.outcome, (SolveOutcome{Status::Unsat, 40, {}}));
  EXPECT_EQ(b.calls.size(), 1u);
}

TEST(SolveWithPolicy, PortfolioFallbackCostsAdd) {
  TableBackend b;
  auto s0 = b.space().default_strategy();
  auto s = b.space().make({{"bump", "0"}});
  b.cost[{1, "bump=0"}] = 400;
  b.cost[{1, "default"}] = 33;
  auto r = solve_with_policy(kEmpty, Cube::from_dimacs({1}), make_portfolio(s, 50, s0), b);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.decided_by, s0);
  EXPECT_EQ(r.outcome.cost, 50u + 33u);
  ASSERT_EQ(b.calls.size(), 2u);
  EXPECT_EQ(b.calls[1].second, kUnlimited);
}

// Random learned/default cost tables: acceptance is exact, and the portfolio
// costs at most the default cost plus first_budget per cube.
TEST(Validate, SoundnessAndBoundedDamage) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    TableBackend b;
    auto s0 = b.space().default_strategy();
    auto learned = b.space().make({{"phase", "0"}});
    const int n = 1 + rng() % 4;
    const Cost budget = 50 + rng() % 100;
    Cost default_uncapped = 0;
    for (int i = 1; i <= n; ++i) {
      b.cost[{i, "default"}] = 1 + rng() % 200;
      b.cost[{i, "phase=0"}] = 1 + rng() % 200;
      default_uncapped += b.cost[{i, "default"}];
    }
    auto [policy, report] = validate(kEmpty, vcubes(n, budget), learned, s0, b, budget, 2);
    EXPECT_EQ(report.accepted, report.cost_learned < report.cost_default);
    if (!report.accepted) {
      EXPECT_TRUE(std::holds_alternative<SequentialPortfolio>(policy));
    }
    Cost total = 0;
    for (int i = 1; i <= n; ++i) {
      auto r = solve_with_policy(kEmpty, Cube::from_dimacs({i}), policy, b);
      EXPECT_EQ(r.outcome.status, Status::Unsat);
      const Cost l = b.cost[{i, "phase=0"}], d = b.cost[{i, "default"}];
      if (report.accepted) {
        EXPECT_EQ(r.outcome.cost, l);
      } else {
        EXPECT_EQ(r.outcome.cost, l <= budget ? l : budget + d);
      }
      total += r.outcome.cost;
    }
    if (!report.accepted) {
      EXPECT_LE(total, default_uncapped + Cost(n) * budget);
    }
  }
}

TEST(Describe, Text) {
  auto space = mini_cdcl_strategy_space();
  auto s = space.make({{"bump", "0"}});
  EXPECT_EQ(describe(SingleStrategy{s}, space), "single(bump=0)");
  EXPECT_EQ(describe(make_portfolio(s, 9, space.default_strategy()), space), "portfolio(bump=0 for 9, then default)");
}
