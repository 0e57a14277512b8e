#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqaoa/core.hpp"

namespace aqaoa {

enum class PauliAxis : std::uint8_t { I, X, Y, Z };

inline char to_char(PauliAxis a) {
  constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
  return kChars[static_cast<int>(a)];
}

/// A weighted tensor product of single-qubit Paulis. axes[0] acts on qubit 1.
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<PauliAxis> axes;

  std::size_t qubits() const noexcept { return axes.size(); }

  std::string label() const {
    std::string s;
    s.reserve(axes.size());
    for (auto a : axes) s.push_back(to_char(a));
    return s;
  }

  bool operator==(const PauliTerm&) const = default;
};

inline PauliTerm parse_pauli_term(std::string_view label, double coefficient) {
  if (label.empty()) throw ConfigError("empty Pauli label");
  if (!std::isfinite(coefficient)) {
    throw ConfigError("non-finite coefficient for Pauli label '" +
                      std::string(label) + "'");
  }
  PauliTerm term{coefficient, {}};
  term.axes.reserve(label.size());
  for (char c : label) {
    switch (c) {
      case 'I': term.axes.push_back(PauliAxis::I); break;
      case 'X': term.axes.push_back(PauliAxis::X); break;
      case 'Y': term.axes.push_back(PauliAxis::Y); break;
      case 'Z': term.axes.push_back(PauliAxis::Z); break;
      default:
        throw ConfigError("invalid character '" + std::string(1, c) +
                          "' in Pauli label '" + std::string(label) + "'");
    }
  }
  return term;
}

/// Label with `axis` on the given zero-based qubit positions and I elsewhere.
inline std::string pauli_label(std::size_t n, std::initializer_list<std::size_t> sites,
                               char axis) {
  std::string s(n, 'I');
  for (auto q : sites) s.at(q) = axis;
  return s;
}

/// Hamiltonian as a real-weighted sum of Pauli strings over n qubits.
class PauliSum {
 public:
  explicit PauliSum(std::size_t qubits) : qubits_(qubits) {
    if (qubits == 0) throw ConfigError("a Pauli sum needs at least one qubit");
  }

  PauliSum(std::size_t qubits, std::vector<PauliTerm> terms) : PauliSum(qubits) {
    for (auto& t : terms) add(std::move(t));
  }

  PauliSum& add(PauliTerm term) {
    if (term.qubits() != qubits_) {
      throw ConfigError("Pauli label '" + term.label() + "' has length " +
                        std::to_string(term.qubits()) + ", expected " +
                        std::to_string(qubits_));
    }
    if (!std::isfinite(term.coefficient)) {
      throw ConfigError("non-finite coefficient on '" + term.label() + "'");
    }
    terms_.push_back(std::move(term));
    return *this;
  }

  PauliSum& add(std::string_view label, double coefficient) {
    return add(parse_pauli_term(label, coefficient));
  }

  std::size_t qubits() const noexcept { return qubits_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  PauliSum scaled(double factor) const {
    PauliSum out(qubits_);
    for (auto t : terms_) {
      t.coefficient *= factor;
      out.add(std::move(t));
    }
    return out;
  }

  friend PauliSum operator+(const PauliSum& a, const PauliSum& b) {
    if (a.qubits_ != b.qubits_) throw ConfigError("Pauli sum qubit count mismatch");
    PauliSum out = a;
    for (const auto& t : b.terms_) out.add(t);
    return out;
  }

  bool operator==(const PauliSum&) const = default;

 private:
  std::size_t qubits_;
  std::vector<PauliTerm> terms_;
};

inline constexpr std::size_t kDefaultQubitCap = 12;

namespace detail {

inline void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw ConfigError("dense matrix for " + std::to_string(n) +
                      " qubits exceeds the cap of " + std::to_string(cap));
  }
}

}  // namespace detail

/// Dense Hermitian matrix of `h`, qubit 1 as the leftmost Kronecker factor.
///
/// Each Pauli string is a signed permutation: P|c> = i^{#Y} (-1)^{|c & yz|} |c ^ xy|
/// where xy marks X/Y positions and yz marks Y/Z positions.
inline Matrix to_matrix(const PauliSum& h, std::size_t cap = kDefaultQubitCap) {
  const std::size_t n = h.qubits();
  detail::check_cap(n, cap);
  const std::size_t dim = std::size_t{1} << n;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  constexpr Complex kIPowers[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& term : h.terms()) {
    std::uint64_t flip = 0, sign = 0;
    int ys = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      switch (term.axes[q]) {
        case PauliAxis::I: break;
        case PauliAxis::X: flip |= bit; break;
        case PauliAxis::Y: flip |= bit; sign |= bit; ++ys; break;
        case PauliAxis::Z: sign |= bit; break;
      }
    }
    const Complex base = kIPowers[ys % 4] * term.coefficient;
    for (std::uint64_t c = 0; c < dim; ++c) {
      const Complex v = (std::popcount(c & sign) & 1) ? -base : base;
      m(static_cast<Eigen::Index>(c ^ flip), static_cast<Eigen::Index>(c)) += v;
    }
  }
  return m;
}

/// Lowest eigenvalue of a Hamiltonian and an orthonormal basis of its eigenspace.
struct GroundSpace {
  double energy = 0.0;
  std::vector<StateVector> basis;
  double degeneracy_tolerance = 1e-9;

  std::size_t degeneracy() const noexcept { return basis.size(); }
};

inline constexpr double kDefaultDegeneracyTolerance = 1e-9;

/// Ground space of a dense Hermitian matrix. Eigenvalues within
/// `degeneracy_tolerance * max|eigenvalue|` of the minimum join the basis.
inline GroundSpace ground_space(const Matrix& h,
                                double degeneracy_tolerance = kDefaultDegeneracyTolerance) {
  if (h.rows() == 0 || h.rows() != h.cols()) {
    throw ConfigError("ground_space needs a nonempty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver failed to converge (dimension " +
                         std::to_string(h.rows()) + ")");
  }
  const auto& values = solver.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  const double threshold = values[0] + degeneracy_tolerance * scale;
  GroundSpace g;
  g.energy = values[0];
  g.degeneracy_tolerance = degeneracy_tolerance;
  for (Eigen::Index k = 0; k < values.size() && values[k] <= threshold; ++k) {
    g.basis.push_back(StateVector::normalized(solver.eigenvectors().col(k)));
  }
  return g;
}

inline GroundSpace ground_space(const PauliSum& h,
                                double degeneracy_tolerance = kDefaultDegeneracyTolerance) {
  if (h.empty()) throw ConfigError("ground_space of an empty Pauli sum");
  return ground_space(to_matrix(h), degeneracy_tolerance);
}

// JSON: { "n": int, "terms": [ { "label": "ZZI", "coeff": -1.0 }, ... ] }

inline nlohmann::json to_json(const PauliSum& h) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : h.terms()) {
    terms.push_back({{"label", t.label()}, {"coeff", t.coefficient}});
  }
  return {{"n", h.qubits()}, {"terms", std::move(terms)}};
}

inline PauliSum pauli_sum_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected a JSON object");
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw ConfigError("problem: field 'n' must be a positive integer");
  }
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
    throw ConfigError("problem: field 'terms' must be a nonempty array");
  }
  PauliSum h(j["n"].get<std::size_t>());
  std::size_t index = 0;
  for (const auto& t : j["terms"]) {
    const std::string where = "problem: terms[" + std::to_string(index++) + "]";
    if (!t.is_object() || !t.contains("label") || !t["label"].is_string()) {
      throw ConfigError(where + ".label must be a string");
    }
    if (!t.contains("coeff") || !t["coeff"].is_number()) {
      throw ConfigError(where + ".coeff must be a number");
    }
    try {
      h.add(t["label"].get<std::string>(), t["coeff"].get<double>());
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return h;
}

}  // namespace aqaoa
