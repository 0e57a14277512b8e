#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "aqaoa/core.hpp"
#include "aqaoa/metrics.hpp"
#include "aqaoa/pauli.hpp"

namespace aqaoa {

/// An annealing problem: mixer, problem Hamiltonian, the mixer ground state the
/// protocol starts from, and the problem's ground space used for scoring.
/// omega_i sets the time unit; total times are in units of 1/omega_i.
struct ProblemInstance {
  std::string name;
  PauliSum h_i;
  PauliSum h_f;
  StateVector initial_state;
  GroundSpace ground;
  double omega_i = 1.0;

  std::size_t qubits() const noexcept { return h_f.qubits(); }

  /// Propagator time for a total time given in units of 1/omega_i.
  double evolution_time(double total_time) const noexcept { return total_time / omega_i; }
};

/// Residual bound for an eigenpair of h: ||H v - E v|| <= 1e-8 max(1, max|H_ij| 2^n).
inline double eigen_residual_bound(const Matrix& h) {
  return 1e-8 * std::max(1.0, h.cwiseAbs().maxCoeff() * static_cast<double>(h.rows()));
}

inline double eigen_residual(const Matrix& h, const StateVector& v, double e) {
  return (h * v.amplitudes() - e * v.amplitudes()).norm();
}

/// Transverse-field mixer (omega_i / 2) sum_j X_j and its ground state |->^n,
/// whose energy is -n omega_i / 2.
inline std::pair<PauliSum, StateVector> mixer(std::size_t n, double omega_i) {
  if (n == 0) throw ConfigError("mixer: qubit count must be positive");
  if (!(omega_i > 0.0) || !std::isfinite(omega_i)) {
    throw ConfigError("mixer: omega_i must be positive");
  }
  detail::check_cap(n, kDefaultQubitCap);
  PauliSum h(n);
  for (std::size_t q = 0; q < n; ++q) h.add(pauli_label(n, {q}, 'X'), 0.5 * omega_i);
  const std::size_t dim = std::size_t{1} << n;
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    v[static_cast<Eigen::Index>(c)] = (std::popcount(c) & 1) ? -amp : amp;
  }
  return {std::move(h), StateVector::normalized(std::move(v))};
}

/// Assembles an instance and checks the initial state against h_i.
inline ProblemInstance make_problem(std::string name, PauliSum h_i, PauliSum h_f,
                                    StateVector initial, double omega_i) {
  if (h_i.qubits() != h_f.qubits()) {
    throw ConfigError(name + ": mixer and problem Hamiltonian qubit counts differ");
  }
  if (initial.dimension() != (std::size_t{1} << h_f.qubits())) {
    throw ConfigError(name + ": initial state dimension mismatch");
  }
  const Matrix mi = to_matrix(h_i);
  const double e_i = energy(initial, mi);
  const GroundSpace gi = ground_space(mi);
  if (std::abs(e_i - gi.energy) > eigen_residual_bound(mi) ||
      eigen_residual(mi, initial, e_i) > eigen_residual_bound(mi)) {
    throw ConfigError(name + ": initial state is not a ground state of the mixer");
  }
  GroundSpace ground = ground_space(h_f);
  return {std::move(name), std::move(h_i), std::move(h_f), std::move(initial), std::move(ground),
          omega_i};
}

/// Mixer (omega/2) X with problem (omega/2) Z.
inline ProblemInstance single_qubit(double omega = 1.0) {
  auto [h_i, phi] = mixer(1, omega);
  PauliSum h_f(1);
  h_f.add("Z", 0.5 * omega);
  return make_problem("single-qubit", std::move(h_i), std::move(h_f), std::move(phi), omega);
}

/// Coefficients of the two-qubit hydrogen Hamiltonian at 0.2 Angstrom bond length.
struct HydrogenCoefficients {
  double identity = 2.8489;  // II
  double z1 = 0.5678;        // ZI
  double z2 = -1.4508;       // IZ
  double zz = 0.6799;        // ZZ
  double yy = 0.0791;        // YY
  double xx = 0.0791;        // XX
};

inline constexpr HydrogenCoefficients kHydrogen{};

/// H2 with the unit mixer omega_i = 1, so total times are in units of 1/omega_i.
inline ProblemInstance hydrogen_molecule() {
  const auto& g = kHydrogen;
  PauliSum h_f(2);
  h_f.add("II", g.identity).add("ZI", g.z1).add("IZ", g.z2);
  h_f.add("ZZ", g.zz).add("YY", g.yy).add("XX", g.xx);
  auto [h_i, phi] = mixer(2, 1.0);
  return make_problem("h2", std::move(h_i), std::move(h_f), std::move(phi), 1.0);
}

inline constexpr double kChainCoupling = 1.0;
inline constexpr double kChainField = 2.0 * kChainCoupling;

namespace detail {

inline PauliSum chain_field(std::size_t n, double omega_f) {
  PauliSum h(n);
  for (std::size_t q = 0; q < n; ++q) h.add(pauli_label(n, {q}, 'Z'), 0.5 * omega_f);
  return h;
}

}  // namespace detail

/// (omega_f/2) sum Z_k - J sum Z_k Z_{k+1} over the n-1 open-boundary bonds,
/// with the mixer frequency set equal to omega_f.
inline ProblemInstance ising_chain(std::size_t n_sites, double omega_f = kChainField,
                                   double coupling = kChainCoupling) {
  if (n_sites == 0) throw ConfigError("ising chain needs at least one site");
  PauliSum h_f = detail::chain_field(n_sites, omega_f);
  for (std::size_t k = 0; k + 1 < n_sites; ++k) {
    h_f.add(pauli_label(n_sites, {k, k + 1}, 'Z'), -coupling);
  }
  auto [h_i, phi] = mixer(n_sites, omega_f);
  return make_problem("ising:" + std::to_string(n_sites), std::move(h_i), std::move(h_f),
                      std::move(phi), omega_f);
}

/// (omega_f/2) sum Z_k - J sum (XX + YY + ZZ) over open-boundary bonds.
inline ProblemInstance heisenberg_chain(std::size_t n_sites, double omega_f = kChainField,
                                        double coupling = kChainCoupling) {
  if (n_sites == 0) throw ConfigError("heisenberg chain needs at least one site");
  PauliSum h_f = detail::chain_field(n_sites, omega_f);
  for (std::size_t k = 0; k + 1 < n_sites; ++k) {
    for (char axis : {'X', 'Y', 'Z'}) {
      h_f.add(pauli_label(n_sites, {k, k + 1}, axis), -coupling);
    }
  }
  auto [h_i, phi] = mixer(n_sites, omega_f);
  return make_problem("heisenberg:" + std::to_string(n_sites), std::move(h_i), std::move(h_f),
                      std::move(phi), omega_f);
}

/// Problem file: the Pauli-sum schema plus optional "omega_i" (default 1) and "name".
inline ProblemInstance problem_from_json(const nlohmann::json& j, std::string fallback_name) {
  PauliSum h_f = pauli_sum_from_json(j);
  double omega_i = 1.0;
  if (j.contains("omega_i")) {
    if (!j["omega_i"].is_number()) throw ConfigError("problem: field 'omega_i' must be a number");
    omega_i = j["omega_i"].get<double>();
  }
  std::string name = std::move(fallback_name);
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("problem: field 'name' must be a string");
    name = j["name"].get<std::string>();
  }
  auto [h_i, phi] = mixer(h_f.qubits(), omega_i);
  return make_problem(std::move(name), std::move(h_i), std::move(h_f), std::move(phi), omega_i);
}

inline ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("problem file '" + path + "': " + e.what());
  }
  try {
    return problem_from_json(j, path);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Built-in names "single-qubit", "h2", "ising:<n>", "heisenberg:<n>"; anything
/// else is read as a problem file path.
inline ProblemInstance resolve_problem(const std::string& name) {
  auto sites = [&](std::size_t prefix) {
    const std::string digits = name.substr(prefix);
    std::size_t used = 0;
    unsigned long n = 0;
    try {
      n = std::stoul(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || n == 0) {
      throw ConfigError("invalid site count in problem name '" + name + "'");
    }
    return static_cast<std::size_t>(n);
  };
  if (name == "single-qubit") return single_qubit(1.0);
  if (name == "h2") return hydrogen_molecule();
  if (name.rfind("ising:", 0) == 0) return ising_chain(sites(6));
  if (name.rfind("heisenberg:", 0) == 0) return heisenberg_chain(sites(11));
  return load_problem(name);
}

}  // namespace aqaoa
