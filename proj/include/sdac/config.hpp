#pragma once

// JSON run configuration. Every key is optional; unknown keys are rejected.
//
// {
//   "initial_depth": 8,
//   "tuning":     {"count": 50, "min_cost": 500,   "max_cost": 10000},
//   "validation": {"count": 25, "min_cost": 10000, "max_cost": 50000},
//   "online_cubes": 64, "budget_growth": 2.0,
//   "tune": {"samples": 20, "beta": 0.001, "proposal_k": 2, "par_multiplier": 2, "probe": true},
//   "portfolio_budget": 50000,
//   "seed": 0, "workers": 1,
//   "cuber": "lookahead" | "unit",
//   "strategy_space": "mini_cdcl" | "kissat" | "marabou"
//                     | {"max_deviations": 4, "params": [{"name": "...", "default": "...", "alternatives": ["..."]}]},
//   "backend": {"kind": "mini_cdcl"}
//            | {"kind": "external", "command": "...", "param_templates": {"NAME": "--NAME={value}"},
//               "sat_pattern": "...", "unsat_pattern": "...", "cost_pattern": "...",
//               "unknown_exit_codes": [0], "workdir": "...", "timeout_ms": 60000, "keep_files": false},
//   "report": "path/to/report.json",
//   "log": "path/to/run.jsonl"
// }

#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sdac/backend.hpp"
#include "sdac/cuber.hpp"
#include "sdac/error.hpp"
#include "sdac/external.hpp"
#include "sdac/orchestrate.hpp"
#include "sdac/strategy.hpp"

namespace sdac {

struct FileConfig {
  RunConfig run;
  CuberKind cuber = CuberKind::Lookahead;
  nlohmann::json space = "mini_cdcl";
  nlohmann::json backend = {{"kind", "mini_cdcl"}};
  std::string report_path;
  std::string log_path;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_to(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void read_band(const nlohmann::json& obj, const char* key, CostBand& band) {
  if (!obj.contains(key)) return;
  const auto& b = obj.at(key);
  check_keys(b, {"count", "min_cost", "max_cost"}, key);
  read_to(b, "count", band.count);
  read_to(b, "min_cost", band.min_cost);
  read_to(b, "max_cost", band.max_cost);
}

}  // namespace detail

inline FileConfig parse_config(const nlohmann::json& j) {
  using detail::read_to;
  detail::check_keys(j,
                     {"initial_depth", "tuning", "validation", "online_cubes", "budget_growth", "tune",
                      "portfolio_budget", "seed", "workers", "cuber", "strategy_space", "backend", "report", "log"},
                     "config");
  FileConfig fc;
  auto& rc = fc.run;
  read_to(j, "initial_depth", rc.initial_depth);
  detail::read_band(j, "tuning", rc.tuning);
  detail::read_band(j, "validation", rc.validation);
  read_to(j, "online_cubes", rc.online_cubes);
  read_to(j, "budget_growth", rc.budget_growth);
  if (j.contains("tune")) {
    const auto& t = j.at("tune");
    detail::check_keys(t, {"samples", "beta", "proposal_k", "par_multiplier", "probe"}, "tune");
    read_to(t, "samples", rc.tune_samples);
    if (t.contains("beta") && !t.at("beta").is_null()) {
      double beta = 0;
      read_to(t, "beta", beta);
      rc.beta = beta;
    }
    read_to(t, "proposal_k", rc.proposal_k);
    read_to(t, "par_multiplier", rc.par_multiplier);
    read_to(t, "probe", rc.probe);
  }
  if (j.contains("portfolio_budget") && !j.at("portfolio_budget").is_null()) {
    Cost b = 0;
    read_to(j, "portfolio_budget", b);
    rc.portfolio_budget = b;
  }
  read_to(j, "seed", rc.seed);
  read_to(j, "workers", rc.workers);
  if (j.contains("cuber")) {
    std::string name;
    read_to(j, "cuber", name);
    fc.cuber = parse_cuber_kind(name);
  }
  if (j.contains("strategy_space")) fc.space = j.at("strategy_space");
  if (j.contains("backend")) fc.backend = j.at("backend");
  read_to(j, "report", fc.report_path);
  read_to(j, "log", fc.log_path);
  rc.validate();
  return fc;
}

inline FileConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  try {
    return parse_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline StrategySpace make_space(const nlohmann::json& decl) {
  if (decl.is_string()) {
    const auto name = decl.get<std::string>();
    if (name == "mini_cdcl") return mini_cdcl_strategy_space();
    if (name == "kissat") return kissat_strategy_space();
    if (name == "marabou") return marabou_strategy_space();
    throw ConfigError("unknown strategy space '" + name + "'");
  }
  detail::check_keys(decl, {"max_deviations", "params"}, "strategy_space");
  std::optional<std::size_t> cap;
  if (decl.contains("max_deviations") && !decl.at("max_deviations").is_null()) {
    cap = decl.at("max_deviations").get<std::size_t>();
  }
  std::vector<ParamDef> params;
  for (const auto& p : decl.at("params")) {
    detail::check_keys(p, {"name", "default", "alternatives"}, "strategy_space param");
    params.push_back({p.at("name").get<std::string>(), p.at("default").get<std::string>(),
                      p.at("alternatives").get<std::vector<std::string>>()});
  }
  return StrategySpace(std::move(params), cap);
}

inline ExternalConfig make_external_config(const nlohmann::json& b) {
  using detail::read_to;
  detail::check_keys(b,
                     {"kind", "command", "param_templates", "sat_pattern", "unsat_pattern", "cost_pattern",
                      "unknown_exit_codes", "workdir", "timeout_ms", "keep_files"},
                     "backend");
  ExternalConfig ec;
  read_to(b, "command", ec.command);
  read_to(b, "param_templates", ec.param_templates);
  read_to(b, "sat_pattern", ec.sat_pattern);
  read_to(b, "unsat_pattern", ec.unsat_pattern);
  read_to(b, "cost_pattern", ec.cost_pattern);
  read_to(b, "unknown_exit_codes", ec.unknown_exit_codes);
  std::string workdir;
  read_to(b, "workdir", workdir);
  ec.workdir = workdir;
  std::int64_t timeout_ms = ec.timeout.count();
  read_to(b, "timeout_ms", timeout_ms);
  ec.timeout = std::chrono::milliseconds(timeout_ms);
  read_to(b, "keep_files", ec.keep_files);
  ec.validate();
  return ec;
}

inline std::unique_ptr<Backend> make_backend(const FileConfig& fc) {
  auto space = make_space(fc.space);
  const auto kind = fc.backend.value("kind", std::string("mini_cdcl"));
  if (kind == "mini_cdcl") {
    detail::check_keys(fc.backend, {"kind"}, "backend");
    return std::make_unique<MiniCdclBackend>(std::move(space), fc.cuber);
  }
  if (kind == "external") {
    return std::make_unique<ExternalBackend>(std::move(space), make_external_config(fc.backend), fc.cuber);
  }
  throw ConfigError("unknown backend kind '" + kind + "'");
}

}  // namespace sdac
