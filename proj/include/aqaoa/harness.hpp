#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqaoa/core.hpp"
#include "aqaoa/metrics.hpp"
#include "aqaoa/optimizer.hpp"
#include "aqaoa/problems.hpp"
#include "aqaoa/propagator.hpp"
#include "aqaoa/schedule.hpp"

namespace aqaoa {

inline constexpr const char* kVersionTag = "aqaoa 1.0.0";

struct ExperimentConfig {
  std::string problem;
  std::vector<std::size_t> parameter_counts;
  std::vector<double> times;
  OptimizerConfig optimizer;
  IntegratorConfig integrator;
  std::string output;
  std::uint64_t seed = 0;
  /// Per-cell wall-clock budget in seconds (0: none). A cell over budget is
  /// recorded with status "timeout"; results then depend on machine speed.
  double cell_time_budget = 0.0;
  /// Write wall time into the CSV `seconds` column. Off by default so that
  /// identical configs give byte-identical CSV.
  bool record_timing = false;

  void validate() const {
    if (problem.empty()) throw ConfigError("experiment: 'problem' is required");
    if (parameter_counts.empty()) throw ConfigError("experiment: 'parameter_counts' is empty");
    if (times.empty()) throw ConfigError("experiment: 'T_values' is empty");
    for (auto m : parameter_counts) {
      if (m == 0) throw ConfigError("experiment: parameter counts must be >= 1");
    }
    for (double t : times) {
      if (!(std::isfinite(t) && t > 0.0)) throw ConfigError("experiment: T values must be positive");
    }
    if (!(integrator.energy_tolerance > 0.0)) {
      throw ConfigError("experiment: energy_tolerance must be positive");
    }
    if (cell_time_budget < 0.0) throw ConfigError("experiment: cell_time_budget must be >= 0");
    for (auto m : parameter_counts) optimizer.validate(m);
  }
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const char* key, const T& fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const OptimizerConfig& c) {
  nlohmann::json j = {{"method", "nelder-mead"},
                      {"max_evaluations", c.max_evaluations},
                      {"restarts", c.restarts},
                      {"initial_simplex_scale", c.initial_simplex_scale},
                      {"convergence_tolerance", c.convergence_tolerance},
                      {"parameter_tolerance", c.parameter_tolerance},
                      {"seed", c.seed}};
  if (!c.bounds.empty()) {
    auto b = nlohmann::json::array();
    for (const auto& p : c.bounds) b.push_back({p.lo, p.hi});
    j["parameter_bounds"] = b;
  }
  return j;
}

inline OptimizerConfig optimizer_from_json(const nlohmann::json& j) {
  constexpr const char* where = "optimizer";
  if (!j.is_object()) throw ConfigError("optimizer: expected an object");
  const std::string method = detail::field<std::string>(j, "method", "nelder-mead", where);
  if (method != "nelder-mead") throw ConfigError("optimizer: unsupported method '" + method + "'");
  OptimizerConfig c;
  c.max_evaluations = detail::field<std::size_t>(j, "max_evaluations", c.max_evaluations, where);
  c.restarts = detail::field<std::size_t>(j, "restarts", c.restarts, where);
  c.initial_simplex_scale =
      detail::field<double>(j, "initial_simplex_scale", c.initial_simplex_scale, where);
  c.convergence_tolerance =
      detail::field<double>(j, "convergence_tolerance", c.convergence_tolerance, where);
  c.parameter_tolerance =
      detail::field<double>(j, "parameter_tolerance", c.parameter_tolerance, where);
  c.seed = detail::field<std::uint64_t>(j, "seed", c.seed, where);
  if (j.contains("parameter_bounds")) {
    const auto& b = j["parameter_bounds"];
    if (!b.is_array()) throw ConfigError("optimizer: parameter_bounds must be an array");
    for (const auto& p : b) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ConfigError("optimizer: each parameter bound must be [lo, hi]");
      }
      c.bounds.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }
  return c;
}

inline nlohmann::json to_json(const IntegratorConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"energy_tolerance", c.energy_tolerance},
          {"step_cap", c.step_cap}};
}

inline IntegratorConfig integrator_from_json(const nlohmann::json& j) {
  constexpr const char* where = "integrator";
  if (!j.is_object()) throw ConfigError("integrator: expected an object");
  IntegratorConfig c;
  c.mode = parse_mode(detail::field<std::string>(j, "mode", to_string(c.mode), where));
  c.energy_tolerance = detail::field<double>(j, "energy_tolerance", c.energy_tolerance, where);
  c.step_cap = detail::field<std::size_t>(j, "step_cap", c.step_cap, where);
  return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"problem", c.problem},
          {"parameter_counts", c.parameter_counts},
          {"T_values", c.times},
          {"optimizer", to_json(c.optimizer)},
          {"integrator", to_json(c.integrator)},
          {"output", c.output},
          {"seed", c.seed},
          {"cell_time_budget", c.cell_time_budget},
          {"record_timing", c.record_timing}};
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  constexpr const char* where = "experiment";
  if (!j.is_object()) throw ConfigError("experiment: expected a JSON object");
  ExperimentConfig c;
  c.problem = detail::field<std::string>(j, "problem", "", where);
  c.parameter_counts =
      detail::field<std::vector<std::size_t>>(j, "parameter_counts", {}, where);
  c.times = detail::field<std::vector<double>>(j, "T_values", {}, where);
  if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j["optimizer"]);
  if (j.contains("integrator")) c.integrator = integrator_from_json(j["integrator"]);
  c.output = detail::field<std::string>(j, "output", "", where);
  c.seed = detail::field<std::uint64_t>(j, "seed", c.seed, where);
  c.cell_time_budget = detail::field<double>(j, "cell_time_budget", 0.0, where);
  c.record_timing = detail::field<bool>(j, "record_timing", false, where);
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config '" + path + "'");
  try {
    return experiment_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("experiment config '" + path + "': " + e.what());
  }
}

/// Parses "start:stop:step" (inclusive stop) or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw ConfigError("invalid number '" + s + "' in grid '" + text + "'");
    }
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) throw ConfigError("grid must be start:stop:step, got '" + text + "'");
    const double a = number(parts[0]), b = number(parts[1]), h = number(parts[2]);
    if (!(h > 0.0) || b < a) throw ConfigError("grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    for (const auto& p : parts) out.push_back(number(p));
  }
  if (out.empty()) throw ConfigError("empty grid '" + text + "'");
  return out;
}

/// The linear schedule lambda(x) = x at total time T, scored against the ground space.
inline Score baseline_linear(const ProblemInstance& problem, double total_time,
                             const IntegratorConfig& integrator = {}) {
  return evaluate_schedule(problem, Schedule::linear(), total_time, integrator).score;
}

/// One (T, m) entry of a sweep.
struct SweepCell {
  double total_time = 0.0;
  std::size_t parameters = 0;
  std::string status = "ok";
  Score score;
  Score baseline;
  std::vector<double> best_parameters;
  std::size_t evaluations = 0;
  std::size_t steps_used = 0;
  double seconds = 0.0;
  bool converged = false;
};

struct RunRecord {
  nlohmann::json config;
  std::string problem;
  std::vector<SweepCell> cells;
  /// Schedule samples of the lowest-relative-error cell.
  std::vector<std::pair<double, double>> best_schedule;
  std::string version = kVersionTag;
};

/// Seed of the cell (T index, m index), independent of execution order.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t t_index, std::size_t m_index) {
  return restart_seed(master, (static_cast<std::uint64_t>(t_index) << 20) | m_index);
}

namespace detail {

class CellTimeout : public Error {
 public:
  CellTimeout() : Error("cell wall-clock budget exceeded") {}
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Runs every (T, m) cell plus the linear baseline at each T. Failures of
/// individual cells land in the status column and the sweep continues.
inline RunRecord run_sweep(const ExperimentConfig& config) {
  config.validate();
  const ProblemInstance problem = resolve_problem(config.problem);
  const Propagator propagator(problem.h_i, problem.h_f);

  RunRecord record;
  record.config = to_json(config);
  record.problem = problem.name;
  double best_error = std::numeric_limits<double>::infinity();
  const auto prefix = [](const std::string& status) {
    return status == "ok" ? std::string() : status + "; ";
  };

  for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
    const double t = config.times[ti];
    Score baseline{NAN, NAN, NAN};
    std::string baseline_status = "ok";
    try {
      baseline = evaluate_schedule(problem, propagator, Schedule::linear(), t, config.integrator)
                     .score;
    } catch (const Error& e) {
      baseline_status = std::string("baseline failed: ") + e.what();
    }
    for (std::size_t mi = 0; mi < config.parameter_counts.size(); ++mi) {
      SweepCell cell;
      cell.total_time = t;
      cell.parameters = config.parameter_counts[mi];
      cell.baseline = baseline;
      if (baseline_status != "ok") cell.status = baseline_status;
      OptimizerConfig oc = config.optimizer;
      oc.seed = cell_seed(config.seed, ti, mi);
      const auto start = std::chrono::steady_clock::now();
      const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      };
      try {
        const Objective objective = [&](std::span<const double> p) {
          if (config.cell_time_budget > 0.0 && elapsed() > config.cell_time_budget) {
            throw detail::CellTimeout();
          }
          return propagator
              .evolve_adaptive(Schedule(p), problem.evolution_time(t), config.integrator.mode,
                               problem.initial_state, config.integrator.energy_tolerance,
                               config.integrator.step_cap)
              .energy;
        };
        const auto opt = optimize(objective, cell.parameters, oc);
        const auto eval = evaluate_schedule(problem, propagator, Schedule(opt.best_parameters), t,
                                            config.integrator);
        cell.score = eval.score;
        cell.steps_used = eval.steps_used;
        cell.best_parameters = opt.best_parameters;
        cell.evaluations = opt.evaluations_used;
        cell.converged = opt.converged;
        if (cell.score.relative_error < best_error) {
          best_error = cell.score.relative_error;
          record.best_schedule = Schedule(opt.best_parameters).sample(kScheduleSamples);
        }
      } catch (const detail::CellTimeout&) {
        cell.status = prefix(cell.status) + "timeout";
        cell.score = {NAN, NAN, NAN};
      } catch (const Error& e) {
        cell.status = prefix(cell.status) + "error: " + e.what();
        cell.score = {NAN, NAN, NAN};
      }
      cell.seconds = elapsed();
      record.cells.push_back(std::move(cell));
    }
  }
  return record;
}

inline constexpr const char* kCsvHeader =
    "problem,T,m,energy,eps_r,fidelity,baseline_eps_r,baseline_fidelity,evals,seconds,status";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(const RunRecord& record, std::ostream& out, bool record_timing = false) {
  using detail::format_number;
  out << kCsvHeader << '\n';
  for (const auto& c : record.cells) {
    out << csv_escape(record.problem) << ',' << format_number(c.total_time) << ','
        << c.parameters << ',' << format_number(c.score.energy) << ','
        << format_number(c.score.relative_error) << ',' << format_number(c.score.fidelity) << ','
        << format_number(c.baseline.relative_error) << ','
        << format_number(c.baseline.fidelity) << ',' << c.evaluations << ','
        << (record_timing ? format_number(c.seconds) : std::string()) << ','
        << csv_escape(c.status) << '\n';
  }
}

inline nlohmann::json to_json(const Score& s) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"energy", num(s.energy)},
          {"relative_error", num(s.relative_error)},
          {"fidelity", num(s.fidelity)}};
}

inline Score score_from_json(const nlohmann::json& j) {
  auto num = [&](const char* k) { return j.at(k).is_null() ? NAN : j.at(k).get<double>(); };
  return {num("energy"), num("relative_error"), num("fidelity")};
}

inline nlohmann::json to_json(const RunRecord& r) {
  auto cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"T", c.total_time},
                     {"m", c.parameters},
                     {"status", c.status},
                     {"score", to_json(c.score)},
                     {"baseline", to_json(c.baseline)},
                     {"parameters", c.best_parameters},
                     {"evaluations", c.evaluations},
                     {"steps_used", c.steps_used},
                     {"seconds", c.seconds},
                     {"converged", c.converged}});
  }
  auto samples = nlohmann::json::array();
  for (const auto& [x, y] : r.best_schedule) samples.push_back({x, y});
  return {{"version", r.version},
          {"problem", r.problem},
          {"config", r.config},
          {"cells", cells},
          {"best_schedule", samples}};
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.version = j.at("version").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.config = j.at("config");
    for (const auto& c : j.at("cells")) {
      SweepCell cell;
      cell.total_time = c.at("T").get<double>();
      cell.parameters = c.at("m").get<std::size_t>();
      cell.status = c.at("status").get<std::string>();
      cell.score = score_from_json(c.at("score"));
      cell.baseline = score_from_json(c.at("baseline"));
      cell.best_parameters = c.at("parameters").get<std::vector<double>>();
      cell.evaluations = c.at("evaluations").get<std::size_t>();
      cell.steps_used = c.at("steps_used").get<std::size_t>();
      cell.seconds = c.at("seconds").get<double>();
      cell.converged = c.at("converged").get<bool>();
      r.cells.push_back(std::move(cell));
    }
    for (const auto& s : j.at("best_schedule")) {
      r.best_schedule.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run record: ") + e.what());
  }
}

/// Writes `<dir>/sweep.csv` and `<dir>/record.json`.
inline void write_outputs(const RunRecord& record, const std::filesystem::path& dir,
                          bool record_timing) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv", std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + (dir / "sweep.csv").string());
  write_csv(record, csv, record_timing);
  std::ofstream js(dir / "record.json", std::ios::binary);
  if (!js) throw ConfigError("cannot write " + (dir / "record.json").string());
  js << to_json(record).dump(2) << '\n';
}

/// Recomputes a cell's score from its stored parameters.
inline Score replay_cell(const ProblemInstance& problem, const SweepCell& cell,
                         const IntegratorConfig& integrator) {
  return evaluate_schedule(problem, Schedule(cell.best_parameters), cell.total_time, integrator)
      .score;
}

struct MinTimeResult {
  std::optional<double> time;
  std::vector<AnnealingRun> runs;

  bool reached() const noexcept { return time.has_value(); }
};

/// Smallest grid time whose optimized fidelity reaches `target`, scanning the
/// ascending grid and stopping at the first success.
inline MinTimeResult find_min_time(const ProblemInstance& problem, std::size_t m,
                                   double fidelity_target, const std::vector<double>& grid,
                                   const OptimizerConfig& optimizer = {},
                                   const IntegratorConfig& integrator = {}) {
  if (!(fidelity_target > 0.0 && fidelity_target < 1.0)) {
    throw ConfigError("fidelity target must lie in (0, 1)");
  }
  if (grid.empty()) throw ConfigError("time grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw ConfigError("time grid must be positive and strictly ascending");
    }
  }
  MinTimeResult result;
  for (double t : grid) {
    result.runs.push_back(optimize_annealing(problem, m, t, optimizer, integrator));
    if (result.runs.back().score.fidelity >= fidelity_target) {
      result.time = t;
      break;
    }
  }
  return result;
}

}  // namespace aqaoa
