// Command-line front end: solve, sweep, min-time, baseline, replay.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aqaoa/harness.hpp"

using namespace aqaoa;
using nlohmann::json;

namespace {

struct Common {
  std::string problem;
  std::uint64_t seed = 0;
  std::string mode = "midpoint";
  std::size_t restarts = OptimizerConfig{}.restarts;
  std::size_t max_evaluations = 0;
  double energy_tolerance = IntegratorConfig{}.energy_tolerance;

  void add_to(CLI::App* app, bool optimizer) {
    app->add_option("--problem", problem, "built-in name or problem JSON file")->required();
    app->add_option("--mode", mode, "midpoint or trotter");
    app->add_option("--energy-tol", energy_tolerance, "adaptive step-doubling tolerance on <H_f>");
    if (optimizer) {
      app->add_option("--seed", seed, "master seed for restarts");
      app->add_option("--restarts", restarts, "Nelder-Mead restarts after the first run");
      app->add_option("--max-evals", max_evaluations, "evaluations per run (0: 2000 m)");
    }
  }

  IntegratorConfig integrator() const {
    IntegratorConfig c;
    c.mode = parse_mode(mode);
    c.energy_tolerance = energy_tolerance;
    return c;
  }

  OptimizerConfig optimizer() const {
    OptimizerConfig c;
    c.seed = seed;
    c.restarts = restarts;
    c.max_evaluations = max_evaluations;
    return c;
  }
};

json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json score_json(const Score& s) {
  return {{"energy", number(s.energy)},
          {"relative_error", number(s.relative_error)},
          {"fidelity", number(s.fidelity)}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

void write_schedule_csv(const std::string& path, const std::vector<std::pair<double, double>>& s) {
  auto out = open_out(path);
  out << "x,lambda\n";
  for (const auto& [x, y] : s) {
    out << detail::format_number(x) << ',' << detail::format_number(y) << '\n';
  }
}

int run_solve(const Common& c, std::size_t m, double t, const std::string& dump,
              const std::string& trace) {
  const auto problem = resolve_problem(c.problem);
  const auto integrator = c.integrator();
  const auto run = optimize_annealing(problem, m, t, c.optimizer(), integrator);
  const auto baseline = baseline_linear(problem, t, integrator);
  if (!dump.empty()) write_schedule_csv(dump, run.schedule_samples);
  if (!trace.empty()) {
    auto out = open_out(trace);
    out << "t,energy\n";
    const Propagator prop(problem.h_i, problem.h_f);
    prop.evolve(Schedule(run.optimization.best_parameters), problem.evolution_time(t),
                run.steps_used, integrator.mode, problem.initial_state,
                [&](double time, double e) {
                  out << detail::format_number(time * problem.omega_i) << ','
                      << detail::format_number(e) << '\n';
                });
  }
  const json j = {{"problem", problem.name},
                  {"T", t},
                  {"m", m},
                  {"parameters", run.optimization.best_parameters},
                  {"score", score_json(run.score)},
                  {"baseline", score_json(baseline)},
                  {"ground_energy", problem.ground.energy},
                  {"evaluations", run.optimization.evaluations_used},
                  {"converged", run.optimization.converged},
                  {"steps_used", run.steps_used}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir,
                  const std::optional<std::uint64_t>& seed) {
  auto config = load_experiment(config_path);
  if (seed) config.seed = *seed;
  if (!out_dir.empty()) config.output = out_dir;
  if (config.output.empty()) throw ConfigError("sweep: no output directory (--out or 'output')");
  const auto record = run_sweep(config);
  write_outputs(record, config.output, config.record_timing);
  write_csv(record, std::cout, config.record_timing);
  return 0;
}

int run_min_time(const Common& c, std::optional<std::size_t> m, double target,
                 const std::string& grid) {
  const auto problem = resolve_problem(c.problem);
  const std::size_t params = m ? *m : problem.qubits();
  const auto result =
      find_min_time(problem, params, target, parse_grid(grid), c.optimizer(), c.integrator());
  auto runs = json::array();
  for (const auto& r : result.runs) {
    runs.push_back({{"T", r.total_time},
                    {"fidelity", r.score.fidelity},
                    {"relative_error", r.score.relative_error},
                    {"parameters", r.optimization.best_parameters}});
  }
  const json j = {{"problem", problem.name},
                  {"m", params},
                  {"target", target},
                  {"reached", result.reached()},
                  {"T_min", result.time ? json(*result.time) : json(nullptr)},
                  {"runs", runs}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_baseline(const Common& c, double t) {
  const auto problem = resolve_problem(c.problem);
  const json j = {{"problem", problem.name},
                  {"T", t},
                  {"score", score_json(baseline_linear(problem, t, c.integrator()))}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_replay(const std::string& path, double tolerance) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run record '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("run record '" + path + "': " + e.what());
  }
  const auto record = record_from_json(j);
  const auto config = experiment_from_json(record.config);
  const auto problem = resolve_problem(config.problem);
  double worst = 0.0;
  for (const auto& cell : record.cells) {
    if (cell.status != "ok") continue;
    const auto s = replay_cell(problem, cell, config.integrator);
    worst = std::max({worst, std::abs(s.relative_error - cell.score.relative_error),
                      std::abs(s.fidelity - cell.score.fidelity)});
  }
  std::cout << "max deviation " << detail::format_number(worst) << '\n';
  if (!(worst <= tolerance)) throw NumericalError("replay deviates from the stored record");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimized annealing schedules on small qubit systems"};
  app.set_version_flag("--version", kVersionTag);
  app.require_subcommand(1);

  Common solve_opts, min_opts, base_opts;
  std::size_t solve_m = 1;
  double solve_t = 0.0;
  std::string dump, trace;
  auto* solve = app.add_subcommand("solve", "optimize one schedule");
  solve_opts.add_to(solve, true);
  solve->add_option("--params", solve_m, "free interior knots M")->required();
  solve->add_option("--time", solve_t, "total time T in units of 1/omega_i")->required();
  solve->add_option("--dump-schedule", dump, "write (x, lambda(x)) samples as CSV");
  solve->add_option("--trace", trace, "write <H_f>(t) along the best protocol as CSV");

  std::string config_path, out_dir;
  std::optional<std::uint64_t> sweep_seed;
  auto* sweep = app.add_subcommand("sweep", "run an experiment config");
  sweep->add_option("--config", config_path, "experiment JSON")->required();
  sweep->add_option("--out", out_dir, "output directory (overrides 'output')");
  sweep->add_option("--seed", sweep_seed, "master seed (overrides 'seed')");

  std::optional<std::size_t> min_m;
  double target = 0.99;
  std::string grid = "0.5:12:0.5";
  auto* min_time = app.add_subcommand("min-time", "smallest grid T reaching a fidelity target");
  min_opts.add_to(min_time, true);
  min_time->add_option("--params", min_m, "free parameters (default: qubit count)");
  min_time->add_option("--target", target, "fidelity target in (0, 1)");
  min_time->add_option("--grid", grid, "start:stop:step or comma list");

  double base_t = 0.0;
  auto* baseline = app.add_subcommand("baseline", "score the linear schedule");
  base_opts.add_to(baseline, false);
  baseline->add_option("--time", base_t, "total time T in units of 1/omega_i")->required();

  std::string record_path;
  double replay_tol = 1e-10;
  auto* replay = app.add_subcommand("replay", "recompute a run record's scores");
  replay->add_option("--record", record_path, "record.json from a sweep")->required();
  replay->add_option("--tolerance", replay_tol, "allowed deviation in eps_r and F");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(solve_opts, solve_m, solve_t, dump, trace);
    if (*sweep) return run_sweep_cmd(config_path, out_dir, sweep_seed);
    if (*min_time) return run_min_time(min_opts, min_m, target, grid);
    if (*baseline) return run_baseline(base_opts, base_t);
    if (*replay) return run_replay(record_path, replay_tol);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
