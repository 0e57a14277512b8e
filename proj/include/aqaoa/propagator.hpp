#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "aqaoa/core.hpp"
#include "aqaoa/pauli.hpp"
#include "aqaoa/schedule.hpp"

namespace aqaoa {

/// How each time step of the interpolated Hamiltonian is applied.
enum class PropagationMode {
  /// exp(-i H(lambda_mid) dt) with lambda held at the step midpoint.
  MidpointExponential,
  /// exp(-i (1 - lambda_mid) dt H_i) then exp(-i lambda_mid dt H_f).
  Trotter1,
};

inline std::string to_string(PropagationMode m) {
  return m == PropagationMode::MidpointExponential ? "midpoint" : "trotter";
}

inline PropagationMode parse_mode(const std::string& s) {
  if (s == "midpoint" || s == "midpoint-exponential") return PropagationMode::MidpointExponential;
  if (s == "trotter" || s == "trotter-1") return PropagationMode::Trotter1;
  throw ConfigError("unknown propagation mode '" + s + "' (expected midpoint or trotter)");
}

struct EvolutionSpec {
  PauliSum h_i;
  PauliSum h_f;
  Schedule schedule;
  double total_time = 1.0;
  std::size_t steps = 1;
  PropagationMode mode = PropagationMode::MidpointExponential;
};

struct AdaptiveEvolution {
  StateVector state;
  std::size_t steps_used = 0;
  double energy = 0.0;
};

inline constexpr std::size_t kDefaultStepCap = std::size_t{1} << 20;
inline constexpr double kRenormalizeThreshold = 1e-8;

/// Called after every step with the elapsed time and <H_f> of the current state.
using EnergyTrace = std::function<void(double time, double energy)>;

inline double max_row_sum(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

/// Evolution under H(t) = [1 - lambda(t/T)] H_i + lambda(t/T) H_f for a fixed
/// pair of Hamiltonians. Holds their dense matrices (and, for Trotter steps,
/// their eigendecompositions) so repeated evolutions reuse them.
class Propagator {
 public:
  Propagator(const PauliSum& h_i, const PauliSum& h_f, std::size_t qubit_cap = kDefaultQubitCap)
      : h_i_(to_matrix(h_i, qubit_cap)), h_f_(to_matrix(h_f, qubit_cap)) {
    if (h_i.qubits() != h_f.qubits()) {
      throw ConfigError("initial and final Hamiltonians act on different qubit counts");
    }
    delta_ = h_f_ - h_i_;
    real_ = h_i_.imag().isZero(0.0) && h_f_.imag().isZero(0.0);
    if (real_) {
      real_i_ = h_i_.real();
      real_delta_ = delta_.real();
    }
    norm_i_ = h_i_.cwiseAbs().colwise().sum().maxCoeff();
    norm_f_ = h_f_.cwiseAbs().colwise().sum().maxCoeff();
    row_scale_ = max_row_sum(h_i_) + max_row_sum(h_f_);
  }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(h_i_.rows()); }
  const Matrix& initial_matrix() const noexcept { return h_i_; }
  const Matrix& final_matrix() const noexcept { return h_f_; }

  /// Evolves over the normalized-time window [x_begin, x_end] of a protocol of
  /// total duration T using `steps` uniform steps. Norm drift above 1e-8 is an
  /// error; smaller drift is renormalized away.
  StateVector evolve_window(const Schedule& schedule, double total_time, double x_begin,
                            double x_end, std::size_t steps, PropagationMode mode,
                            const StateVector& initial, const EnergyTrace& trace = {}) const {
    return finalize(
        propagate(schedule, total_time, x_begin, x_end, steps, mode, initial, trace), steps);
  }

  /// As evolve_window, returning the raw amplitudes before renormalization.
  Vector propagate(const Schedule& schedule, double total_time, double x_begin, double x_end,
                   std::size_t steps, PropagationMode mode, const StateVector& initial,
                   const EnergyTrace& trace = {}) const {
    if (!(std::isfinite(total_time) && total_time > 0.0)) {
      throw ConfigError("total time must be finite and positive");
    }
    if (steps == 0) throw ConfigError("step count must be positive");
    if (!(0.0 <= x_begin && x_begin < x_end && x_end <= 1.0)) {
      throw ConfigError("evolution window must satisfy 0 <= begin < end <= 1");
    }
    if (initial.dimension() != dimension()) throw ConfigError("initial state dimension mismatch");
    if (std::abs(initial.amplitudes().norm() - 1.0) > kNormTolerance) {
      throw ConfigError("initial state is not normalized");
    }
    const TrotterFactors* factors =
        mode == PropagationMode::Trotter1 ? &trotter_factors() : nullptr;

    const double width = (x_end - x_begin) / static_cast<double>(steps);
    const double dt = total_time * width;
    if (real_ && mode == PropagationMode::MidpointExponential) {
      return evolve_real(schedule, total_time, x_begin, width, steps, initial, trace);
    }
    Workspace ws(dimension());
    Vector psi = initial.amplitudes();
    for (std::size_t k = 0; k < steps; ++k) {
      const double x_mid = x_begin + (static_cast<double>(k) + 0.5) * width;
      const double lambda = schedule.eval(x_mid);
      if (mode == PropagationMode::MidpointExponential) {
        ws.h.noalias() = h_i_ + lambda * delta_;
        const double norm = std::abs(1.0 - lambda) * norm_i_ + std::abs(lambda) * norm_f_;
        apply_exponential(ws, norm, dt, psi);
      } else {
        apply_diagonalized(factors->initial, (1.0 - lambda) * dt, ws, psi);
        apply_diagonalized(factors->final, lambda * dt, ws, psi);
      }
      if (!psi.allFinite()) {
        throw NumericalError("non-finite amplitudes after step " + std::to_string(k + 1) +
                             " of " + std::to_string(steps));
      }
      if (trace) {
        trace(total_time * (x_begin + static_cast<double>(k + 1) * width),
              expectation_unchecked(h_f_, psi));
      }
    }
    return psi;
  }

  StateVector evolve(const Schedule& schedule, double total_time, std::size_t steps,
                     PropagationMode mode, const StateVector& initial,
                     const EnergyTrace& trace = {}) const {
    return evolve_window(schedule, total_time, 0.0, 1.0, steps, mode, initial, trace);
  }

  /// Starting step count of the adaptive integrator, max(64, ceil(16 T s)) where
  /// s is the sum of the max-row-sum norms of H_i and H_f.
  std::size_t initial_steps(double total_time) const {
    const double k = std::ceil(16.0 * total_time * row_scale_);
    if (!(k < static_cast<double>(kDefaultStepCap) * 4.0)) return kDefaultStepCap * 4;
    return std::max<std::size_t>(64, static_cast<std::size_t>(k));
  }

  /// Doubles the step count from initial_steps(T) until the final <H_f> moves by
  /// less than `energy_tolerance`, returning the finer of the last two runs.
  AdaptiveEvolution evolve_adaptive(const Schedule& schedule, double total_time,
                                    PropagationMode mode, const StateVector& initial,
                                    double energy_tolerance,
                                    std::size_t step_cap = kDefaultStepCap) const {
    if (!(energy_tolerance > 0.0)) throw ConfigError("energy tolerance must be positive");
    std::size_t steps = initial_steps(total_time);
    StateVector state = evolve(schedule, total_time, steps, mode, initial);
    double energy = final_energy(state);
    while (steps * 2 <= step_cap) {
      steps *= 2;
      StateVector finer = evolve(schedule, total_time, steps, mode, initial);
      const double finer_energy = final_energy(finer);
      const bool done = std::abs(finer_energy - energy) < energy_tolerance;
      state = std::move(finer);
      energy = finer_energy;
      if (done) return {std::move(state), steps, energy};
    }
    throw NumericalError("adaptive integrator hit the step cap of " + std::to_string(step_cap) +
                         " without reaching energy tolerance " + std::to_string(energy_tolerance));
  }

  double final_energy(const StateVector& s) const {
    return expectation_unchecked(h_f_, s.amplitudes());
  }

 private:
  struct Spectrum {
    Eigen::VectorXd values;
    Matrix vectors;
  };

  struct Workspace {
    explicit Workspace(std::size_t d)
        : h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
          term(static_cast<Eigen::Index>(d)),
          next(static_cast<Eigen::Index>(d)),
          sum(static_cast<Eigen::Index>(d)) {}
    Matrix h;
    Vector term, next, sum;
  };

  static StateVector finalize(Vector psi, std::size_t steps) {
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > kRenormalizeThreshold) {
      throw NumericalError("norm drifted by " + std::to_string(drift) + " over " +
                           std::to_string(steps) + " steps");
    }
    return StateVector::normalized(std::move(psi));
  }

  // Real symmetric H: the state is held as (Re, Im) columns so each product
  // with H is a real matrix product. Same Taylor scheme as apply_exponential.
  using RealPair = Eigen::Matrix<double, Eigen::Dynamic, 2>;

  Vector evolve_real(const Schedule& schedule, double total_time, double x_begin, double width,
                     std::size_t steps, const StateVector& initial,
                     const EnergyTrace& trace) const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd h(d, d);
    RealPair psi(d, 2), term(d, 2), next(d, 2), sum(d, 2);
    psi.col(0) = initial.amplitudes().real();
    psi.col(1) = initial.amplitudes().imag();
    const double dt = total_time * width;
    for (std::size_t k = 0; k < steps; ++k) {
      const double lambda = schedule.eval(x_begin + (static_cast<double>(k) + 0.5) * width);
      h.noalias() = real_i_ + lambda * real_delta_;
      const double norm = std::abs(1.0 - lambda) * norm_i_ + std::abs(lambda) * norm_f_;
      const auto pieces = substeps(norm, dt);
      const double hstep = dt / static_cast<double>(pieces);
      for (std::size_t p = 0; p < pieces; ++p) {
        sum = psi;
        term = psi;
        const double base = psi.squaredNorm();
        for (int j = 1; j < kMaxTaylorTerms; ++j) {
          next.noalias() = h * term;
          // term <- (-i hstep / j) next
          const double c = hstep / j;
          term.col(0) = c * next.col(1);
          term.col(1) = -c * next.col(0);
          sum += term;
          if (term.squaredNorm() <= kTaylorCutoff * base) break;
        }
        psi = sum;
      }
      if (!psi.allFinite()) {
        throw NumericalError("non-finite amplitudes after step " + std::to_string(k + 1) +
                             " of " + std::to_string(steps));
      }
      if (trace) {
        trace(total_time * (x_begin + static_cast<double>(k + 1) * width),
              expectation_unchecked(h_f_, to_complex(psi)));
      }
    }
    return to_complex(psi);
  }

  static Vector to_complex(const RealPair& p) {
    Vector v(p.rows());
    v.real() = p.col(0);
    v.imag() = p.col(1);
    return v;
  }

  static constexpr double kTaylorTheta = 0.5;
  static constexpr double kTaylorCutoff = 1e-34;  // squared relative term size
  static constexpr int kMaxTaylorTerms = 60;

  static constexpr double kMaxSubsteps = 1e6;

  static std::size_t substeps(double norm, double dt) {
    const double pieces = std::max(1.0, std::ceil(norm * dt / kTaylorTheta));
    if (!(pieces <= kMaxSubsteps)) {
      throw NumericalError("step Hamiltonian norm " + std::to_string(norm) +
                           " is too large for the step exponential");
    }
    return static_cast<std::size_t>(pieces);
  }

  static double expectation_unchecked(const Matrix& h, const Vector& psi) {
    return psi.dot(h * psi).real();
  }

  // psi <- exp(-i H dt) psi by a truncated Taylor series, sub-stepped so each
  // piece has ||H dt||_1 <= 1/2; terms are summed until they fall below
  // machine precision.
  static void apply_exponential(Workspace& ws, double norm, double dt, Vector& psi) {
    const auto pieces = substeps(norm, dt);
    const double h = dt / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p) {
      ws.sum = psi;
      ws.term = psi;
      const double base = psi.squaredNorm();
      for (int j = 1; j < kMaxTaylorTerms; ++j) {
        ws.next.noalias() = ws.h * ws.term;
        ws.term = ws.next * Complex(0.0, -h / j);
        ws.sum += ws.term;
        if (ws.term.squaredNorm() <= kTaylorCutoff * base) break;
      }
      psi = ws.sum;
    }
  }

  static void apply_diagonalized(const Spectrum& s, double dt, Workspace& ws, Vector& psi) {
    ws.next.noalias() = s.vectors.adjoint() * psi;
    for (Eigen::Index j = 0; j < ws.next.size(); ++j) {
      ws.next[j] *= std::polar(1.0, -dt * s.values[j]);
    }
    psi.noalias() = s.vectors * ws.next;
  }

  static Spectrum diagonalize(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition for a Trotter factor failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
  }

  struct TrotterFactors {
    std::once_flag once;
    Spectrum initial, final;
  };

  const TrotterFactors& trotter_factors() const {
    std::call_once(trotter_->once, [this] {
      trotter_->initial = diagonalize(h_i_);
      trotter_->final = diagonalize(h_f_);
    });
    return *trotter_;
  }

  Matrix h_i_, h_f_, delta_;
  bool real_ = false;
  Eigen::MatrixXd real_i_, real_delta_;
  double norm_i_ = 0.0, norm_f_ = 0.0, row_scale_ = 0.0;
  std::shared_ptr<TrotterFactors> trotter_ = std::make_shared<TrotterFactors>();
};

inline StateVector evolve(const EvolutionSpec& spec, const StateVector& initial) {
  return Propagator(spec.h_i, spec.h_f)
      .evolve(spec.schedule, spec.total_time, spec.steps, spec.mode, initial);
}

/// Ignores spec.steps; the step count is chosen by the doubling rule.
inline AdaptiveEvolution evolve_adaptive(const EvolutionSpec& spec, const StateVector& initial,
                                         double energy_tolerance,
                                         std::size_t step_cap = kDefaultStepCap) {
  return Propagator(spec.h_i, spec.h_f)
      .evolve_adaptive(spec.schedule, spec.total_time, spec.mode, initial, energy_tolerance,
                       step_cap);
}

}  // namespace aqaoa
