#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "aqaoa/core.hpp"
#include "aqaoa/pauli.hpp"

namespace aqaoa {

struct Score {
  double energy = 0.0;
  double relative_error = 0.0;
  double fidelity = 0.0;
};

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kGroundEnergyGuard = 1e-12;

/// <state|H|state> for a dense Hermitian H. A non-negligible imaginary part
/// means H was not Hermitian.
inline double energy(const StateVector& state, const Matrix& h) {
  if (static_cast<std::size_t>(h.rows()) != state.dimension()) {
    throw ConfigError("energy: state and Hamiltonian dimensions differ");
  }
  const Complex value = state.amplitudes().dot(h * state.amplitudes());
  if (std::abs(value.imag()) > kHermiticityTolerance) {
    throw NumericalError("energy: expectation has imaginary part " +
                         std::to_string(value.imag()) + "; Hamiltonian is not Hermitian");
  }
  return value.real();
}

inline double energy(const StateVector& state, const PauliSum& h_f) {
  if ((std::size_t{1} << h_f.qubits()) != state.dimension()) {
    throw ConfigError("energy: state and Hamiltonian dimensions differ");
  }
  return energy(state, to_matrix(h_f));
}

inline double relative_error(double achieved, const GroundSpace& ground) {
  if (std::abs(ground.energy) <= kGroundEnergyGuard) {
    throw ConfigError(
        "relative error undefined: ground energy is ~0; add a constant (identity) term "
        "to the final Hamiltonian to shift its spectrum");
  }
  return std::abs(achieved - ground.energy) / std::abs(ground.energy);
}

/// Weight of `state` in the ground eigenspace, sum_j |<b_j|state>|^2. For a
/// non-degenerate ground state this is the usual overlap |<psi|state>|^2.
inline double fidelity(const StateVector& state, const GroundSpace& ground) {
  double total = 0.0;
  for (const auto& b : ground.basis) total += std::norm(b.inner(state));
  return total;
}

inline Score score(const StateVector& state, const Matrix& h_f, const GroundSpace& ground) {
  const double e = energy(state, h_f);
  return {e, relative_error(e, ground), fidelity(state, ground)};
}

}  // namespace aqaoa
