#include <gtest/gtest.h>

#include "aqaoa/harness.hpp"
#include "aqaoa/optimizer.hpp"
#include "aqaoa/problems.hpp"

using namespace aqaoa;

namespace {

double quadratic(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += (v - 0.5) * (v - 0.5);
  return s;
}

double rosenbrock(std::span<const double> p) {
  return 100.0 * std::pow(p[1] - p[0] * p[0], 2) + std::pow(1.0 - p[0], 2);
}

OptimizerConfig quick() {
  OptimizerConfig c;
  c.restarts = 1;
  return c;
}

}  // namespace

TEST(LinearStart, UniformKnots) {
  EXPECT_EQ(linear_start(3), (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(linear_start(1), (std::vector<double>{0.5}));
}

TEST(NelderMead, ConvexQuadratic) {
  const auto r = optimize(quadratic, 3, OptimizerConfig{});
  ASSERT_EQ(r.best_parameters.size(), 3u);
  for (double v : r.best_parameters) EXPECT_NEAR(v, 0.5, 1e-4);
  EXPECT_LT(r.best_energy, 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(NelderMead, ConstantObjectiveKeepsStart) {
  const auto r = optimize([](std::span<const double>) { return 7.0; }, 3, OptimizerConfig{});
  EXPECT_EQ(r.best_energy, 7.0);
  EXPECT_EQ(r.best_parameters, linear_start(3));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.evaluations_used, 4u * 5u);  // one simplex per run
}

TEST(NelderMead, Rosenbrock) {
  OptimizerConfig c;
  c.restarts = 0;
  const auto r = optimize(rosenbrock, 2, c, std::vector<double>{-1.2, 1.0});
  EXPECT_NEAR(r.best_parameters[0], 1.0, 1e-4);
  EXPECT_NEAR(r.best_parameters[1], 1.0, 1e-4);
}

TEST(NelderMead, HistoryInvariants) {
  const auto r = optimize(rosenbrock, 2, quick());
  ASSERT_EQ(r.history.size(), r.evaluations_used);
  double running = INFINITY, minimum = INFINITY;
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    EXPECT_EQ(r.history[i].evaluation, i + 1);
    const double next = std::min(running, r.history[i].energy);
    EXPECT_LE(next, running);
    running = next;
    minimum = std::min(minimum, r.history[i].energy);
  }
  EXPECT_EQ(r.best_energy, minimum);
}

TEST(NelderMead, Deterministic) {
  OptimizerConfig c;
  c.seed = 99;
  const auto a = optimize(rosenbrock, 2, c), b = optimize(rosenbrock, 2, c);
  EXPECT_EQ(a.best_parameters, b.best_parameters);
  EXPECT_EQ(a.best_energy, b.best_energy);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].energy, b.history[i].energy);
  }
  c.seed = 100;
  const auto other = optimize(rosenbrock, 2, c);
  auto energies = [](const OptimizationResult& r) {
    std::vector<double> e;
    for (const auto& h : r.history) e.push_back(h.energy);
    return e;
  };
  EXPECT_NE(energies(other), energies(a));
}

TEST(NelderMead, RestartsPerturbTheStart) {
  std::vector<std::vector<double>> firsts;
  OptimizerConfig c;
  c.restarts = 3;
  c.max_evaluations = 3;  // initial simplex only
  optimize(
      [&](std::span<const double> p) {
        firsts.emplace_back(p.begin(), p.end());
        return 0.0;
      },
      2, c);
  // Runs start at evaluations 0, 3, 6, 9.
  ASSERT_EQ(firsts.size(), 12u);
  EXPECT_EQ(firsts[0], linear_start(2));
  for (std::size_t r = 1; r < 4; ++r) {
    const auto& s = firsts[3 * r];
    EXPECT_NE(s, linear_start(2));
    for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(std::abs(s[j] - linear_start(2)[j]), 0.2);
  }
}

TEST(NelderMead, BoundsClampProposals) {
  OptimizerConfig c;
  c.bounds = {{0.6, 1.0}};
  const auto r = optimize(quadratic, 2, c);
  for (double v : r.best_parameters) EXPECT_NEAR(v, 0.6, 1e-8);
  c.bounds = {{0.0, 0.4}, {0.45, 1.0}};
  const auto r2 = optimize(quadratic, 2, c);
  EXPECT_NEAR(r2.best_parameters[0], 0.4, 1e-8);
  EXPECT_NEAR(r2.best_parameters[1], 0.5, 1e-4);
}

TEST(NelderMead, BudgetExhaustionIsReportedNotThrown) {
  OptimizerConfig c;
  c.restarts = 0;
  c.max_evaluations = 10;
  const auto r = optimize(rosenbrock, 2, c, std::vector<double>{-1.2, 1.0});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.evaluations_used, 10u);
  EXPECT_TRUE(std::isfinite(r.best_energy));
}

TEST(NelderMead, NonFiniteObjectiveNamesParameters) {
  try {
    optimize([](std::span<const double>) { return NAN; }, 2, OptimizerConfig{});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("0.333"), std::string::npos) << e.what();
  }
}

TEST(NelderMead, ConfigValidation) {
  OptimizerConfig c;
  c.initial_simplex_scale = 0.0;
  EXPECT_THROW(optimize(quadratic, 2, c), ConfigError);
  c = {};
  c.convergence_tolerance = -1.0;
  EXPECT_THROW(optimize(quadratic, 2, c), ConfigError);
  c = {};
  c.bounds = {{1.0, 0.0}};
  EXPECT_THROW(optimize(quadratic, 2, c), ConfigError);
  c = {};
  c.bounds = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  EXPECT_THROW(optimize(quadratic, 2, c), ConfigError);
  EXPECT_THROW(optimize(quadratic, 0, OptimizerConfig{}), ConfigError);
  EXPECT_THROW(optimize(quadratic, 2, OptimizerConfig{}, std::vector<double>{1.0}), ConfigError);
}

TEST(OptimizeAnnealing, SingleQubitTwoParametersAgreesWithGridSearch) {
  const auto p = single_qubit(1.0);
  const IntegratorConfig ic;
  const Propagator prop(p.h_i, p.h_f);
  // Exhaustive 2-D grid over knot values as the attainability oracle.
  double grid_best = INFINITY;
  for (int i = 0; i <= 60; ++i) {
    for (int j = 0; j <= 60; ++j) {
      const std::vector<double> knots{-1.0 + 0.05 * i, -1.0 + 0.05 * j};
      grid_best = std::min(grid_best,
                           evaluate_schedule(p, prop, Schedule(knots), 4.0, ic).score.relative_error);
    }
  }
  EXPECT_LT(grid_best, 1e-2);
  const auto run = optimize_annealing(p, 2, 4.0, OptimizerConfig{}, ic);
  EXPECT_LT(run.score.relative_error, 1e-2);
  EXPECT_LE(run.score.relative_error, grid_best + 1e-9);
  EXPECT_GE(run.score.fidelity, 0.99);
  EXPECT_EQ(run.schedule_samples.size(), kScheduleSamples);
}

TEST(OptimizeAnnealing, NeverWorseThanLinear) {
  for (const auto& p : {single_qubit(1.0), hydrogen_molecule()}) {
    for (double t : {2.0, 5.0}) {
      const auto run = optimize_annealing(p, 1, t, quick());
      EXPECT_LE(run.optimization.best_energy, baseline_linear(p, t).energy + 1e-12);
      EXPECT_LE(run.score.energy, baseline_linear(p, t).energy + 1e-6);
    }
  }
}

TEST(OptimizeAnnealing, OneParameterBeatsLinearAtLongTime) {
  const auto p = hydrogen_molecule();
  const auto run = optimize_annealing(p, 1, 20.0, quick());
  EXPECT_LT(run.score.relative_error, baseline_linear(p, 20.0).relative_error);
}

TEST(OptimizeAnnealing, SchedulesLeaveTheUnitInterval) {
  // Single qubit, two parameters, T = 3: the optimum overshoots [0, 1].
  const auto run = optimize_annealing(single_qubit(1.0), 2, 3.0, OptimizerConfig{});
  const bool outside = std::any_of(run.schedule_samples.begin(), run.schedule_samples.end(),
                                   [](const auto& s) { return s.second > 1.0 || s.second < 0.0; });
  EXPECT_TRUE(outside);
}

TEST(OptimizeAnnealing, RejectsBadTime) {
  EXPECT_THROW(optimize_annealing(single_qubit(1.0), 1, 0.0, quick()), ConfigError);
}

TEST(EvaluateSchedule, TimeIsMeasuredInUnitsOfTheMixerFrequency) {
  // Scaling both Hamiltonians by omega and time by 1/omega leaves the dynamics unchanged.
  const Schedule s(std::vector<double>{0.7, 0.2});
  const auto slow = evaluate_schedule(single_qubit(1.0), s, 3.0, IntegratorConfig{});
  const auto fast = evaluate_schedule(single_qubit(2.0), s, 3.0, IntegratorConfig{});
  EXPECT_NEAR(fast.score.fidelity, slow.score.fidelity, 1e-12);
  EXPECT_NEAR(fast.score.relative_error, slow.score.relative_error, 1e-12);
  EXPECT_EQ(fast.steps_used, slow.steps_used);

  const auto chain = ising_chain(2);
  const Propagator prop(chain.h_i, chain.h_f);
  const auto direct = prop.evolve_adaptive(s, 1.5, PropagationMode::MidpointExponential,
                                           chain.initial_state, 1e-6);
  EXPECT_EQ(evaluate_schedule(chain, prop, s, 3.0, IntegratorConfig{}).score.energy,
            direct.energy);
}
