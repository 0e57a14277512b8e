#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aqaoa/core.hpp"
#include "aqaoa/metrics.hpp"
#include "aqaoa/problems.hpp"
#include "aqaoa/propagator.hpp"
#include "aqaoa/schedule.hpp"

namespace aqaoa {

struct ParameterBounds {
  double lo;
  double hi;
};

struct OptimizerConfig {
  /// Evaluation budget of each Nelder-Mead run; 0 selects 2000 * m.
  std::size_t max_evaluations = 0;
  std::size_t restarts = 4;
  double initial_simplex_scale = 0.2;
  /// Stop when max - min objective over the simplex falls below this.
  double convergence_tolerance = 1e-10;
  /// ... or when every vertex lies within this distance (inf-norm) of the best.
  double parameter_tolerance = 1e-10;
  /// Empty: unbounded. Otherwise one (lo, hi) per parameter, or a single pair
  /// applied to every parameter.
  std::vector<ParameterBounds> bounds;
  std::uint64_t seed = 0;

  std::size_t budget(std::size_t m) const { return max_evaluations ? max_evaluations : 2000 * m; }

  void validate(std::size_t m) const {
    if (!(initial_simplex_scale > 0.0)) throw ConfigError("initial_simplex_scale must be positive");
    if (!(convergence_tolerance > 0.0)) throw ConfigError("convergence_tolerance must be positive");
    if (!(parameter_tolerance >= 0.0)) throw ConfigError("parameter_tolerance must be non-negative");
    if (!bounds.empty() && bounds.size() != 1 && bounds.size() != m) {
      throw ConfigError("parameter_bounds must have 1 or m entries");
    }
    for (const auto& b : bounds) {
      if (!(b.lo < b.hi)) throw ConfigError("parameter bounds need lo < hi");
    }
  }
};

struct HistoryEntry {
  std::size_t evaluation;
  double energy;
};

struct OptimizationResult {
  std::vector<double> best_parameters;
  double best_energy = std::numeric_limits<double>::infinity();
  std::size_t evaluations_used = 0;
  std::vector<HistoryEntry> history;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Interior knots of the linear schedule with m free parameters: k / (m + 1).
inline std::vector<double> linear_start(std::size_t m) {
  std::vector<double> p(m);
  for (std::size_t k = 0; k < m; ++k) {
    p[k] = static_cast<double>(k + 1) / static_cast<double>(m + 1);
  }
  return p;
}

/// Seed of restart r, derived from the master seed by a splitmix64 step so
/// restarts are independent of evaluation order.
inline std::uint64_t restart_seed(std::uint64_t master, std::uint64_t restart) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (restart + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

class NelderMead {
 public:
  NelderMead(const Objective& f, const OptimizerConfig& config, OptimizationResult& out)
      : f_(f), config_(config), out_(out) {}

  struct Run {
    std::vector<double> best;
    double best_value;
    bool converged;
  };

  Run run(std::vector<double> start, std::size_t budget) {
    const std::size_t m = start.size();
    used_ = 0;
    budget_ = budget;
    clamp(start);
    vertices_.assign(m + 1, start);
    values_.assign(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) {
      vertices_[i][i - 1] += config_.initial_simplex_scale;
      clamp(vertices_[i]);
    }
    for (std::size_t i = 0; i <= m && used_ < budget_; ++i) values_[i] = eval(vertices_[i]);
    if (used_ < m + 1) return finish(false, used_);

    std::vector<double> centroid(m), trial(m), second(m);
    for (;;) {
      order();
      if (converged()) return finish(true, m + 1);
      if (used_ >= budget_) return finish(false, m + 1);

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) centroid[j] += vertices_[i][j];
      }
      for (auto& c : centroid) c /= static_cast<double>(m);
      auto& worst = vertices_[m];

      along(centroid, worst, -1.0, trial);  // reflection
      const double fr = eval(trial);
      if (fr < values_[0]) {
        along(centroid, worst, -2.0, second);  // expansion
        if (used_ < budget_) {
          const double fe = eval(second);
          if (fe < fr) {
            accept(second, fe);
            continue;
          }
        }
        accept(trial, fr);
      } else if (fr < values_[m - 1]) {
        accept(trial, fr);
      } else {
        const bool outside = fr < values_[m];
        along(centroid, worst, outside ? -0.5 : 0.5, second);  // contraction
        if (used_ >= budget_) {
          if (outside) accept(trial, fr);
          continue;
        }
        const double fc = eval(second);
        if (fc < std::min(fr, values_[m])) {
          accept(second, fc);
        } else {
          shrink();
        }
      }
    }
  }

 private:
  double eval(const std::vector<double>& x) {
    const double v = f_(std::span<const double>(x));
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "objective returned a non-finite value at parameters [";
      for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
      os << "]";
      throw NumericalError(os.str());
    }
    ++used_;
    ++out_.evaluations_used;
    out_.history.push_back({out_.evaluations_used, v});
    return v;
  }

  void clamp(std::vector<double>& x) const {
    if (config_.bounds.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& b = config_.bounds.size() == 1 ? config_.bounds[0] : config_.bounds[i];
      x[i] = std::clamp(x[i], b.lo, b.hi);
    }
  }

  // out = c + t (w - c), clamped.
  void along(const std::vector<double>& c, const std::vector<double>& w, double t,
             std::vector<double>& out) const {
    for (std::size_t j = 0; j < c.size(); ++j) out[j] = c[j] + t * (w[j] - c[j]);
    clamp(out);
  }

  void accept(const std::vector<double>& x, double v) {
    vertices_.back() = x;
    values_.back() = v;
  }

  void shrink() {
    for (std::size_t i = 1; i < vertices_.size() && used_ < budget_; ++i) {
      for (std::size_t j = 0; j < vertices_[i].size(); ++j) {
        vertices_[i][j] = vertices_[0][j] + 0.5 * (vertices_[i][j] - vertices_[0][j]);
      }
      clamp(vertices_[i]);
      values_[i] = eval(vertices_[i]);
    }
  }

  // Stable so that among equal values the earliest vertex (initially the
  // start point) stays best.
  void order() {
    std::vector<std::size_t> idx(values_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
    std::vector<std::vector<double>> v;
    std::vector<double> f;
    v.reserve(idx.size());
    f.reserve(idx.size());
    for (auto i : idx) {
      v.push_back(std::move(vertices_[i]));
      f.push_back(values_[i]);
    }
    vertices_ = std::move(v);
    values_ = std::move(f);
  }

  bool converged() const {
    if (values_.back() - values_.front() <= config_.convergence_tolerance) return true;
    double size = 0.0;
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
      for (std::size_t j = 0; j < vertices_[i].size(); ++j) {
        size = std::max(size, std::abs(vertices_[i][j] - vertices_[0][j]));
      }
    }
    return size <= config_.parameter_tolerance;
  }

  Run finish(bool converged, std::size_t evaluated) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < evaluated; ++i) {
      if (values_[i] < values_[best]) best = i;
    }
    return {vertices_[best], values_[best], converged};
  }

  const Objective& f_;
  const OptimizerConfig& config_;
  OptimizationResult& out_;
  std::vector<std::vector<double>> vertices_;
  std::vector<double> values_;
  std::size_t used_ = 0, budget_ = 0;
};

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

}  // namespace detail

/// Nelder-Mead minimization of `objective` over m parameters.
///
/// The first run starts at `start` (the linear schedule when omitted); each
/// restart starts from `start` plus uniform noise in [-scale, +scale] per
/// coordinate. The best point over all runs is returned. Running out of budget
/// is reported through `converged`, not thrown.
inline OptimizationResult optimize(const Objective& objective, std::size_t m,
                                   const OptimizerConfig& config,
                                   std::optional<std::vector<double>> start = std::nullopt) {
  if (m == 0) throw ConfigError("optimize: need at least one parameter");
  config.validate(m);
  const std::vector<double> origin = start ? *start : linear_start(m);
  if (origin.size() != m) throw ConfigError("optimize: start point has wrong dimension");

  OptimizationResult out;
  detail::NelderMead nm(objective, config, out);
  for (std::size_t r = 0; r <= config.restarts; ++r) {
    std::vector<double> x = origin;
    if (r > 0) {
      std::mt19937_64 rng(restart_seed(config.seed, r));
      for (auto& v : x) {
        v += config.initial_simplex_scale * (2.0 * detail::unit_uniform(rng) - 1.0);
      }
    }
    const auto run = nm.run(std::move(x), config.budget(m));
    if (run.best_value < out.best_energy) {
      out.best_energy = run.best_value;
      out.best_parameters = run.best;
      out.converged = run.converged;
    }
  }
  return out;
}

struct IntegratorConfig {
  PropagationMode mode = PropagationMode::MidpointExponential;
  double energy_tolerance = 1e-6;
  std::size_t step_cap = kDefaultStepCap;
};

/// Score of one schedule on a problem, integrated adaptively.
struct ScheduleEvaluation {
  Score score;
  std::size_t steps_used = 0;
};

inline ScheduleEvaluation evaluate_schedule(const ProblemInstance& problem,
                                            const Propagator& propagator,
                                            const Schedule& schedule, double total_time,
                                            const IntegratorConfig& integrator) {
  auto run = propagator.evolve_adaptive(schedule, problem.evolution_time(total_time),
                                        integrator.mode, problem.initial_state,
                                        integrator.energy_tolerance, integrator.step_cap);
  const Score s{run.energy, relative_error(run.energy, problem.ground),
                fidelity(run.state, problem.ground)};
  return {s, run.steps_used};
}

inline ScheduleEvaluation evaluate_schedule(const ProblemInstance& problem,
                                            const Schedule& schedule, double total_time,
                                            const IntegratorConfig& integrator) {
  return evaluate_schedule(problem, Propagator(problem.h_i, problem.h_f), schedule, total_time,
                           integrator);
}

/// One optimized protocol: the knot values found, their score, and samples of
/// the resulting schedule.
struct AnnealingRun {
  std::string problem;
  double total_time = 0.0;
  std::size_t parameters = 0;
  OptimizationResult optimization;
  Score score;
  std::size_t steps_used = 0;
  std::vector<std::pair<double, double>> schedule_samples;
};

inline constexpr std::size_t kScheduleSamples = 201;

/// Minimizes the final energy <H_f> over m interior knot values at total time
/// T. Each objective call builds the schedule and integrates it adaptively.
inline AnnealingRun optimize_annealing(const ProblemInstance& problem, std::size_t m,
                                       double total_time, const OptimizerConfig& config,
                                       const IntegratorConfig& integrator = {}) {
  if (!(std::isfinite(total_time) && total_time > 0.0)) {
    throw ConfigError("total time must be finite and positive");
  }
  const Propagator propagator(problem.h_i, problem.h_f);
  const Objective objective = [&](std::span<const double> p) {
    return propagator
        .evolve_adaptive(Schedule(p), problem.evolution_time(total_time), integrator.mode,
                         problem.initial_state, integrator.energy_tolerance, integrator.step_cap)
        .energy;
  };

  AnnealingRun run;
  run.problem = problem.name;
  run.total_time = total_time;
  run.parameters = m;
  try {
    run.optimization = optimize(objective, m, config);
  } catch (const NumericalError& e) {
    throw NumericalError(problem.name + " (T=" + std::to_string(total_time) +
                         ", m=" + std::to_string(m) + "): " + e.what());
  }
  const Schedule best(run.optimization.best_parameters);
  const auto eval = evaluate_schedule(problem, propagator, best, total_time, integrator);
  run.score = eval.score;
  run.steps_used = eval.steps_used;
  run.schedule_samples = best.sample(kScheduleSamples);
  return run;
}

}  // namespace aqaoa
