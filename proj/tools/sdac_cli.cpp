// Command-line front end: solve, cnc, cube, tune-report, gen.
//
// Exit codes: 10 Sat, 20 Unsat, 0 unknown, 1 error, 2 usage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sdac/sdac.hpp"

namespace {

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

sdac::Formula read_formula(const std::string& path, bool from_stdin) {
  std::vector<std::string> warnings;
  sdac::Formula f;
  if (from_stdin) {
    f = sdac::parse_dimacs(read_all(std::cin), &warnings);
  } else {
    std::ifstream in(path);
    if (!in) throw sdac::Error("cannot read " + path);
    f = sdac::parse_dimacs(read_all(in), &warnings);
  }
  for (const auto& w : warnings) std::cerr << "c warning: " << w << '\n';
  return f;
}

int exit_code(sdac::Status s) {
  switch (s) {
    case sdac::Status::Sat: return 10;
    case sdac::Status::Unsat: return 20;
    case sdac::Status::Unknown: return 0;
  }
  return 1;
}

struct SolveArgs {
  std::string config;
  std::string formula;
  bool from_stdin = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string report;
  std::string log;
};

int run_solve(const SolveArgs& args, bool learning) {
  if (args.formula.empty() == !args.from_stdin) {
    std::cerr << "error: give exactly one of a formula file or --stdin\n";
    return 2;
  }
  sdac::FileConfig fc = args.config.empty() ? sdac::FileConfig{} : sdac::load_config(args.config);
  if (args.seed) fc.run.seed = *args.seed;
  if (args.workers) fc.run.workers = *args.workers;
  if (!args.report.empty()) fc.report_path = args.report;
  if (!args.log.empty()) fc.log_path = args.log;
  fc.run.validate();

  const auto formula = read_formula(args.formula, args.from_stdin);
  auto backend = sdac::make_backend(fc);
  std::optional<sdac::RunLog> log;
  if (!fc.log_path.empty()) log.emplace(fc.log_path);
  auto report = learning ? sdac::sdac(formula, fc.run, *backend, log ? &*log : nullptr)
                         : sdac::plain_cnc(formula, fc.run, *backend, log ? &*log : nullptr);
  if (!fc.report_path.empty()) {
    std::ofstream out(fc.report_path);
    out << sdac::to_json(report, backend->space(), true).dump(2) << '\n';
    if (!out) throw sdac::Error("cannot write report " + fc.report_path);
  }
  if (report.error) {
    std::cerr << "error: " << *report.error << '\n';
    std::cout << "s UNKNOWN\n";
    return 1;
  }
  std::cout << "c policy " << report.policy << '\n';
  if (report.learned) std::cout << "c learned " << *report.learned << '\n';
  switch (report.answer) {
    case sdac::Status::Sat: {
      std::cout << "s SATISFIABLE\nv";
      for (std::size_t v = 0; v < report.model.size(); ++v) std::cout << ' ' << (report.model[v] ? "" : "-") << v + 1;
      std::cout << " 0\n";
      break;
    }
    case sdac::Status::Unsat: std::cout << "s UNSATISFIABLE\n"; break;
    case sdac::Status::Unknown: std::cout << "s UNKNOWN\n"; break;
  }
  return exit_code(report.answer);
}

struct LogData {
  std::vector<sdac::CubeRow> rows;
  std::string learned;
  sdac::Cost par_multiplier = 2;
};

LogData read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sdac::Error("cannot read log " + path);
  LogData data;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.contains("summary")) {
      if (j.contains("learned") && j["learned"].is_string()) data.learned = j["learned"].get<std::string>();
      if (j.contains("par_multiplier")) data.par_multiplier = j["par_multiplier"].get<sdac::Cost>();
      continue;
    }
    data.rows.push_back(sdac::row_from_json(j));
  }
  return data;
}

int run_tune_report(const std::string& log_path, const std::string& baseline_path, const std::string& out_dir) {
  const auto run = read_log(log_path);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  {
    // Tuning cubes under the default and the learned strategy.
    std::map<std::uint64_t, std::pair<std::optional<sdac::Cost>, std::optional<sdac::Cost>>> by_cube;
    for (const auto& row : run.rows) {
      if (row.phase != "tune") continue;
      auto capped = row.status == sdac::Status::Unknown ? run.par_multiplier * row.budget : row.cost;
      if (row.strategy == "default") by_cube[row.cube_id].first = capped;
      if (!run.learned.empty() && row.strategy == run.learned) by_cube[row.cube_id].second = capped;
    }
    std::ofstream out(dir / "tuning_cubes.csv");
    out << "cube_id,cost_default,cost_learned,phase\n";
    for (const auto& [id, costs] : by_cube) {
      if (!costs.first || !costs.second) continue;
      out << id << ',' << *costs.first << ',' << *costs.second << ",tune\n";
    }
  }
  if (baseline_path.empty()) return 0;

  const auto base = read_log(baseline_path);
  std::map<std::string, sdac::Cost> base_cost;
  for (const auto& row : base.rows)
    if (row.phase == "solve") base_cost[row.cube] = row.cost;
  std::ofstream common(dir / "common_cubes.csv");
  std::ofstream attempts(dir / "common_attempts.csv");
  common << "cube_id,cost_default,cost_learned,phase\n";
  attempts << "cube_id,cost_default,cost_learned,phase\n";
  for (const auto& row : run.rows) {
    if (row.phase != "solve") continue;
    auto it = base_cost.find(row.cube);
    if (it == base_cost.end()) continue;
    common << row.cube_id << ',' << it->second << ',' << row.cost << ",solve\n";
    attempts << row.cube_id << ',' << it->second << ',' << row.first_cost.value_or(row.cost) << ",solve\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cube-and-conquer SAT solving with self-driven strategy tuning"};
  app.require_subcommand(1);

  SolveArgs solve_args, cnc_args;
  auto add_solve_options = [](CLI::App* cmd, SolveArgs& a) {
    cmd->add_option("formula", a.formula, "DIMACS CNF file");
    cmd->add_flag("--stdin", a.from_stdin, "Read the formula from standard input");
    cmd->add_option("--config", a.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--seed", a.seed, "Override the configured seed");
    cmd->add_option("--workers", a.workers, "Override the worker count")->check(CLI::PositiveNumber);
    cmd->add_option("--report", a.report, "Write the run report (JSON) here");
    cmd->add_option("--log", a.log, "Write the per-cube run log (JSON lines) here");
  };
  auto* solve = app.add_subcommand("solve", "Cube, learn a strategy, and solve");
  add_solve_options(solve, solve_args);
  auto* cnc = app.add_subcommand("cnc", "Plain cube-and-conquer with the default strategy");
  add_solve_options(cnc, cnc_args);

  auto* cube = app.add_subcommand("cube", "Partition a formula and print it as iCNF");
  std::size_t depth = 0;
  std::string cube_formula, cuber_name = "lookahead", cube_out;
  bool cube_stdin = false;
  cube->add_option("--depth", depth, "Split depth (at most 2^depth cubes)")->required()->check(CLI::Range(1, 30));
  cube->add_option("--cuber", cuber_name, "lookahead or unit");
  cube->add_option("formula", cube_formula, "DIMACS CNF file");
  cube->add_flag("--stdin", cube_stdin, "Read the formula from standard input");
  cube->add_option("-o,--output", cube_out, "Output file (default: standard output)");

  auto* report = app.add_subcommand("tune-report", "Render run logs as CSV scatter tables");
  std::string log_path, baseline_path, out_dir = ".";
  report->add_option("--log", log_path, "Run log of a solve run")->required()->check(CLI::ExistingFile);
  report->add_option("--baseline", baseline_path, "Run log of a cnc run on the same formula")
      ->check(CLI::ExistingFile);
  report->add_option("--out-dir", out_dir, "Directory for the CSV files");

  auto* gen = app.add_subcommand("gen", "Print a benchmark formula as DIMACS");
  gen->require_subcommand(1);
  std::uint32_t pigeons = 0, holes = 0, width = 0, vars = 0, clauses = 0;
  std::uint64_t gen_seed = 0;
  auto* php = gen->add_subcommand("php", "Pigeonhole formula");
  php->add_option("pigeons", pigeons)->required()->check(CLI::PositiveNumber);
  php->add_option("holes", holes)->required()->check(CLI::PositiveNumber);
  auto* xr = gen->add_subcommand("xor", "XOR-chain equivalence miter");
  xr->add_option("width", width)->required()->check(CLI::Range(2u, 1u << 20));
  xr->add_option("seed", gen_seed);
  auto* rnd = gen->add_subcommand("random", "Uniform random 3-CNF");
  rnd->add_option("vars", vars)->required()->check(CLI::Range(3u, 1u << 24));
  rnd->add_option("clauses", clauses)->required();
  rnd->add_option("seed", gen_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve) return run_solve(solve_args, true);
    if (*cnc) return run_solve(cnc_args, false);
    if (*cube) {
      if (cube_formula.empty() == !cube_stdin) {
        std::cerr << "error: give exactly one of a formula file or --stdin\n";
        return 2;
      }
      const auto formula = read_formula(cube_formula, cube_stdin);
      auto split = sdac::split_cube(sdac::parse_cuber_kind(cuber_name), formula, sdac::Cube{}, std::size_t{1} << depth);
      if (split.decided) std::cerr << "c decided by propagation: " << sdac::to_string(*split.decided) << '\n';
      const auto text = sdac::write_icnf(formula, split.cubes);
      if (cube_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(cube_out);
        out << text;
        if (!out) throw sdac::Error("cannot write " + cube_out);
      }
      return 0;
    }
    if (*report) return run_tune_report(log_path, baseline_path, out_dir);
    if (*gen) {
      sdac::Formula f;
      if (*php) f = sdac::gen_benchmark(sdac::Php{pigeons, holes});
      else if (*xr) f = sdac::gen_benchmark(sdac::XorMiter{width, gen_seed});
      else f = sdac::gen_benchmark(sdac::Random3Cnf{vars, clauses, gen_seed});
      std::cout << sdac::write_dimacs(f);
      return 0;
    }
  } catch (const sdac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
