#pragma once

// End-to-end runs: cube, collect + tune + collect + validate, then solve the
// remaining cubes under the final policy. plain_cnc skips the learning part.

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdac/backend.hpp"
#include "sdac/collect.hpp"
#include "sdac/error.hpp"
#include "sdac/formula.hpp"
#include "sdac/outcome.hpp"
#include "sdac/parallel.hpp"
#include "sdac/strategy.hpp"
#include "sdac/tune.hpp"
#include "sdac/validate.hpp"

namespace sdac {

struct CostBand {
  std::size_t count = 1;
  Cost min_cost = 0;
  Cost max_cost = 1;
};

struct RunConfig {
  std::size_t initial_depth = 8;  // initial partition into at most 2^depth cubes
  CostBand tuning{50, 500, 10000};
  CostBand validation{25, 10000, 50000};
  std::size_t online_cubes = 64;
  double budget_growth = 2.0;
  std::size_t tune_samples = 20;
  std::optional<double> beta;
  std::size_t proposal_k = 2;
  Cost par_multiplier = 2;
  bool probe = true;
  std::optional<Cost> portfolio_budget;  // default: validation max_cost
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    if (initial_depth < 1 || initial_depth > 30) throw ConfigError("initial_depth must be in [1, 30]");
    for (const auto* band : {&tuning, &validation}) {
      if (band->count < 1) throw ConfigError("cube counts must be >= 1");
      if (band->min_cost >= band->max_cost) throw ConfigError("cost band needs min_cost < max_cost");
    }
    if (online_cubes < 2) throw ConfigError("online_cubes must be >= 2");
    if (!(budget_growth >= 1.0)) throw ConfigError("budget_growth must be >= 1");
    if (tune_samples < 1) throw ConfigError("tune samples must be >= 1");
    if (beta && !(*beta > 0)) throw ConfigError("beta must be positive");
    if (proposal_k < 1) throw ConfigError("proposal_k must be >= 1");
    if (par_multiplier < 1) throw ConfigError("par_multiplier must be >= 1");
    if (portfolio_budget && *portfolio_budget == 0) throw ConfigError("portfolio_budget must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

// One line of the run log: a solver call or a split, tagged with its phase
// (tuning, tune, validation, validate, solve).
struct CubeRow {
  std::string phase;
  std::uint64_t cube_id = 0;
  std::string cube;
  std::uint32_t resplits = 0;
  std::string strategy;
  Status status = Status::Unknown;
  Cost cost = 0;
  Cost budget = 0;  // 0 = unlimited
  std::string disposition;
  std::optional<Cost> first_cost;  // first portfolio leg, when the fallback ran
  double wall_ms = 0;
};

inline nlohmann::json to_json(const CubeRow& row, bool include_timings) {
  nlohmann::json j{{"phase", row.phase},   {"cube_id", row.cube_id}, {"cube", row.cube},
                   {"resplits", row.resplits}, {"strategy", row.strategy}, {"status", to_string(row.status)},
                   {"cost", row.cost},     {"budget", row.budget},   {"disposition", row.disposition}};
  if (row.first_cost) j["first_cost"] = *row.first_cost;
  if (include_timings) j["wall_ms"] = row.wall_ms;
  return j;
}

inline CubeRow row_from_json(const nlohmann::json& j) {
  CubeRow row;
  row.phase = j.at("phase").get<std::string>();
  row.cube_id = j.at("cube_id").get<std::uint64_t>();
  row.cube = j.at("cube").get<std::string>();
  row.resplits = j.value("resplits", 0u);
  row.strategy = j.at("strategy").get<std::string>();
  auto st = j.at("status").get<std::string>();
  row.status = st == "sat" ? Status::Sat : st == "unsat" ? Status::Unsat : Status::Unknown;
  row.cost = j.at("cost").get<Cost>();
  row.budget = j.value("budget", Cost{0});
  row.disposition = j.value("disposition", std::string{});
  if (j.contains("first_cost")) row.first_cost = j.at("first_cost").get<Cost>();
  row.wall_ms = j.value("wall_ms", 0.0);
  return row;
}

// Line-delimited JSON sink. Thread-safe; a default-constructed log discards.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(const std::string& path) : out_(std::make_unique<std::ofstream>(path)) {
    if (!*out_) throw Error("cannot open run log " + path);
  }

  void write(const nlohmann::json& record) {
    if (!out_) return;
    std::lock_guard lock(mutex_);
    *out_ << record.dump() << '\n';
    out_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> out_;
  std::mutex mutex_;
};

struct PhaseTimes {
  double cube_ms = 0;
  double learn_ms = 0;
  double solve_ms = 0;
  double total_ms = 0;
};

struct RunReport {
  std::string mode;  // "sdac" or "cnc"
  Status answer = Status::Unknown;
  Model model;
  std::string decided_in;  // phase that produced the answer
  std::optional<std::string> error;
  std::size_t initial_cubes = 0;
  std::optional<std::string> learned;  // tuned strategy, when tuning ran
  std::optional<bool> accepted;        // validation decision, when it ran
  std::string policy;
  std::optional<TuneReport> tune;
  std::optional<ValidationReport> validation;
  std::vector<CubeRow> rows;
  PhaseTimes times;
  BackendStats stats;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

class RunContext {
 public:
  RunContext(RunReport& report, RunLog* log, const StrategySpace& space) : report_(report), log_(log), space_(space) {}

  void add(CubeRow row) {
    if (log_) log_->write(to_json(row, true));
    report_.rows.push_back(std::move(row));
  }

  void add_events(const std::string& phase, const std::vector<CollectEvent>& events) {
    for (const auto& ev : events) {
      add({phase, ev.cube_id, ev.cube.to_string(), ev.resplits, ev.strategy ? space_.to_string(*ev.strategy) : "",
           ev.status, ev.cost, ev.budget, std::string(to_string(ev.disposition)), std::nullopt, ev.wall_ms});
    }
  }

 private:
  RunReport& report_;
  RunLog* log_;
  const StrategySpace& space_;
};

inline void verify_answer_model(const Formula& formula, const Model& model) {
  if (!model.empty() && !satisfies(formula, model)) throw Error("reported model violates the formula");
}

}  // namespace detail

inline RunReport run_cube_and_conquer(const Formula& formula, const RunConfig& cfg, Backend& backend, bool learning,
                                      RunLog* log = nullptr) {
  cfg.validate();
  using detail::Clock;
  const auto run_start = Clock::now();
  const auto stats_before = backend.stats();
  const StrategySpace& space = backend.space();
  const Strategy sigma0 = space.default_strategy();

  RunReport report;
  report.mode = learning ? "sdac" : "cnc";
  detail::RunContext ctx(report, log, space);
  auto finish = [&](Status answer, Model model, std::string phase) {
    detail::verify_answer_model(formula, model);
    report.answer = answer;
    report.model = std::move(model);
    report.decided_in = std::move(phase);
    report.times.total_ms = detail::ms_since(run_start);
    auto after = backend.stats();
    report.stats = {after.solves - stats_before.solves, after.cache_hits - stats_before.cache_hits,
                    after.cube_calls - stats_before.cube_calls};
    if (log) {
      log->write({{"summary", true},
                  {"mode", report.mode},
                  {"answer", to_string(report.answer)},
                  {"decided_in", report.decided_in},
                  {"learned", report.learned ? nlohmann::json(*report.learned) : nlohmann::json(nullptr)},
                  {"policy", report.policy},
                  {"par_multiplier", cfg.par_multiplier}});
    }
    return report;
  };

  // Initial partition.
  auto t0 = Clock::now();
  CubeSplit split = backend.cube(formula, Cube{}, std::size_t{1} << cfg.initial_depth, derive_seed(cfg.seed, 0xc0u));
  report.times.cube_ms = detail::ms_since(t0);
  if (split.decided) return finish(*split.decided, std::move(split.model), "cubing");
  CubeQueue queue(split.cubes);
  report.initial_cubes = queue.size();

  FinalPolicy policy = SingleStrategy{sigma0};
  const auto learn_start = Clock::now();
  if (learning) {
    CollectConfig tc;
    tc.sample_target = cfg.tuning.count;
    tc.min_cost = cfg.tuning.min_cost;
    tc.max_cost = cfg.tuning.max_cost;
    tc.online_cubes = cfg.online_cubes;
    tc.budget_growth = cfg.budget_growth;
    tc.strategy_pool = enumerate(space);
    tc.seed = derive_seed(cfg.seed, 0x7111u);
    auto tuned_cubes = collect(formula, queue, tc, backend, cfg.workers);
    ctx.add_events("tuning", tuned_cubes.events);
    if (tuned_cubes.status != Status::Unknown) {
      report.times.learn_ms = detail::ms_since(learn_start);
      return finish(tuned_cubes.status, std::move(tuned_cubes.model), "tuning");
    }

    std::vector<Cube> cubes;
    std::vector<std::uint64_t> ids;
    for (const auto& c : tuned_cubes.collected) {
      cubes.push_back(c.record.cube);
      ids.push_back(c.record.id);
    }
    TuneConfig tcfg;
    tcfg.num_samples = cfg.tune_samples;
    tcfg.beta = cfg.beta;
    tcfg.proposal_k = cfg.proposal_k;
    tcfg.per_cube_budget = cfg.tuning.max_cost;
    tcfg.par_multiplier = cfg.par_multiplier;
    tcfg.probe = cfg.probe;
    tcfg.seed = derive_seed(cfg.seed, 0x7e4eu);
    tcfg.workers = cfg.workers;
    CubeCostOracle oracle(formula, cubes, backend, tcfg.per_cube_budget, tcfg.par_multiplier, cfg.workers);
    TuneReport tr = tune(oracle, space, tcfg);
    for (const auto& s : oracle.evaluated()) {
      const auto& outcomes = oracle.per_cube(s);
      for (std::size_t i = 0; i < cubes.size(); ++i) {
        ctx.add({"tune", ids[i], cubes[i].to_string(), tuned_cubes.collected[i].record.resplit_count,
                 space.to_string(s), outcomes[i].status, outcomes[i].cost, oracle.budget(), "attempt", std::nullopt,
                 0.0});
      }
    }
    report.learned = space.to_string(tr.best);
    const Strategy learned = tr.best;
    report.tune = std::move(tr);

    if (learned != sigma0) {
      CollectConfig vc = tc;
      vc.sample_target = cfg.validation.count;
      vc.min_cost = cfg.validation.min_cost;
      vc.max_cost = cfg.validation.max_cost;
      vc.strategy_pool = {learned};
      vc.seed = derive_seed(cfg.seed, 0x7a1du);
      auto val_cubes = collect(formula, queue, vc, backend, cfg.workers);
      ctx.add_events("validation", val_cubes.events);
      if (val_cubes.status != Status::Unknown) {
        report.times.learn_ms = detail::ms_since(learn_start);
        return finish(val_cubes.status, std::move(val_cubes.model), "validation");
      }
      std::vector<ValidationCube> vcubes;
      for (const auto& c : val_cubes.collected) vcubes.push_back({c.record.id, c.record.cube, c.record.budget, c.cost});
      const Cost first_budget = cfg.portfolio_budget.value_or(cfg.validation.max_cost);
      auto [pol, vr] = validate(formula, vcubes, learned, sigma0, backend, first_budget, cfg.par_multiplier,
                                cfg.workers);
      for (std::size_t i = 0; i < vr.per_cube.size(); ++i) {
        const auto& row = vr.per_cube[i];
        ctx.add({"validate", row.cube_id, row.cube.to_string(), val_cubes.collected[i].record.resplit_count,
                 space.to_string(sigma0), row.default_status, row.cost_default, vcubes[i].budget, "attempt",
                 std::nullopt, 0.0});
      }
      policy = pol;
      report.accepted = vr.accepted;
      report.validation = std::move(vr);
    }
  }
  report.policy = describe(policy, space);
  report.times.learn_ms = detail::ms_since(learn_start);

  // Final phase over the canonical queue order.
  const auto solve_start = Clock::now();
  const auto remaining = queue.ids();
  struct Slot {
    std::optional<PolicyOutcome> result;
    double wall_ms = 0;
  };
  std::vector<Slot> slots(remaining.size());
  std::atomic<bool> stop{false};
  try {
    parallel_for(
        remaining.size(), cfg.workers,
        [&](std::size_t i) {
          const auto started = Clock::now();
          auto r = solve_with_policy(formula, queue.at(remaining[i]).cube, policy, backend);
          slots[i].wall_ms = detail::ms_since(started);
          if (r.outcome.status == Status::Sat) stop = true;
          slots[i].result = std::move(r);
        },
        &stop);
  } catch (const Timeout& e) {
    report.error = e.what();
  }

  std::optional<std::size_t> first_sat;
  bool all_unsat = !report.error;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].result) {
      all_unsat = false;
      continue;
    }
    if (slots[i].result->outcome.status == Status::Sat) {
      first_sat = i;
      break;
    }
    if (slots[i].result->outcome.status != Status::Unsat) all_unsat = false;
  }
  const std::size_t shown = first_sat ? *first_sat + 1 : slots.size();
  for (std::size_t i = 0; i < shown; ++i) {
    if (!slots[i].result) continue;
    const auto& rec = queue.at(remaining[i]);
    const auto& r = *slots[i].result;
    std::optional<Cost> first_cost;
    if (r.fell_back) first_cost = std::get<SequentialPortfolio>(policy).first_budget;
    ctx.add({"solve", rec.id, rec.cube.to_string(), rec.resplit_count, space.to_string(r.decided_by), r.outcome.status,
             r.outcome.cost, 0, r.outcome.status == Status::Sat ? "sat" : "solved", first_cost, slots[i].wall_ms});
  }
  report.times.solve_ms = detail::ms_since(solve_start);
  if (first_sat) {
    Model model = slots[*first_sat].result->outcome.model;
    return finish(Status::Sat, std::move(model), "solve");
  }
  return finish(all_unsat ? Status::Unsat : Status::Unknown, {}, "solve");
}

inline RunReport sdac(const Formula& formula, const RunConfig& cfg, Backend& backend, RunLog* log = nullptr) {
  return run_cube_and_conquer(formula, cfg, backend, true, log);
}

inline RunReport plain_cnc(const Formula& formula, const RunConfig& cfg, Backend& backend, RunLog* log = nullptr) {
  return run_cube_and_conquer(formula, cfg, backend, false, log);
}

// Serialized report. Without volatile fields (timings and solver-call tallies,
// which depend on scheduling and on earlier use of the backend) the output is
// a pure function of formula, config and seed.
inline nlohmann::json to_json(const RunReport& r, const StrategySpace& space, bool include_volatile = false) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["answer"] = to_string(r.answer);
  j["decided_in"] = r.decided_in;
  if (r.error) j["error"] = *r.error;
  if (r.answer == Status::Sat && !r.model.empty()) {
    std::vector<std::int64_t> lits;
    for (std::size_t v = 0; v < r.model.size(); ++v) lits.push_back(r.model[v] ? std::int64_t(v + 1) : -std::int64_t(v + 1));
    j["model"] = lits;
  }
  j["initial_cubes"] = r.initial_cubes;
  j["learned"] = r.learned ? nlohmann::json(*r.learned) : nlohmann::json(nullptr);
  j["accepted"] = r.accepted ? nlohmann::json(*r.accepted) : nlohmann::json(nullptr);
  j["policy"] = r.policy;
  if (r.tune) {
    nlohmann::json t;
    t["best"] = space.to_string(r.tune->best);
    t["best_cost"] = r.tune->best_cost;
    t["default_cost"] = r.tune->default_cost;
    t["beta"] = r.tune->beta;
    t["evaluations"] = r.tune->evaluations;
    auto steps = [&](const std::vector<TrajectoryStep>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& s : v) a.push_back({{"strategy", space.to_string(s.strategy)}, {"cost", s.cost}, {"accepted", s.accepted}});
      return a;
    };
    t["probes"] = steps(r.tune->probes);
    t["trajectory"] = steps(r.tune->trajectory);
    j["tune"] = t;
  }
  if (r.validation) {
    j["validation"] = {{"cost_learned", r.validation->cost_learned},
                       {"cost_default", r.validation->cost_default},
                       {"accepted", r.validation->accepted}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row, include_volatile));
  j["rows"] = rows;
  if (include_volatile) {
    j["times_ms"] = {{"cube", r.times.cube_ms}, {"learn", r.times.learn_ms}, {"solve", r.times.solve_ms},
                     {"total", r.times.total_ms}};
    j["calls"] = {{"solves", r.stats.solves}, {"cache_hits", r.stats.cache_hits}, {"cube_calls", r.stats.cube_calls}};
  }
  return j;
}

// Sum of final-phase costs on cubes solved in the final phase of both runs.
struct CommonCost {
  std::size_t cubes = 0;
  Cost baseline = 0;
  Cost tuned = 0;
};

inline CommonCost common_cube_cost(const RunReport& baseline, const RunReport& tuned) {
  std::map<std::string, Cost> base;
  for (const auto& row : baseline.rows)
    if (row.phase == "solve") base[row.cube] = row.cost;
  CommonCost out;
  for (const auto& row : tuned.rows) {
    if (row.phase != "solve") continue;
    auto it = base.find(row.cube);
    if (it == base.end()) continue;
    ++out.cubes;
    out.baseline += it->second;
    out.tuned += row.cost;
  }
  return out;
}

// Total solver cost charged by a run (every attempt in every phase).
inline Cost total_cost(const RunReport& r) {
  Cost total = 0;
  for (const auto& row : r.rows) total += row.cost;
  return total;
}

}  // namespace sdac
