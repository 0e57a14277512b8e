#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aqaoa {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input, malformed file, or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The numerics failed: non-finite values, eigensolver failure, norm drift.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kNormTolerance = 1e-10;

/// A normalized complex amplitude vector over 2^n computational basis states.
///
/// Basis index bits are ordered with qubit 1 as the most significant bit, so
/// |q1 q2 ... qn> has index q1 * 2^(n-1) + ... + qn.
class StateVector {
 public:
  StateVector() = default;

  /// Wraps amplitudes that must already have unit norm (within 1e-10).
  static StateVector from_amplitudes(Vector amplitudes) {
    check_dimension(amplitudes.size());
    const double norm = amplitudes.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormTolerance) {
      throw NumericalError("state vector is not normalized (norm " +
                           std::to_string(norm) + ")");
    }
    return StateVector(std::move(amplitudes));
  }

  /// Normalizes arbitrary nonzero amplitudes.
  static StateVector normalized(Vector amplitudes) {
    check_dimension(amplitudes.size());
    const double norm = amplitudes.norm();
    if (!std::isfinite(norm) || norm <= 0.0) {
      throw NumericalError("cannot normalize a zero or non-finite vector");
    }
    amplitudes /= norm;
    return StateVector(std::move(amplitudes));
  }

  /// Computational basis state |index> in an n-qubit register.
  static StateVector basis(std::size_t qubits, std::size_t index) {
    const auto dim = std::size_t{1} << qubits;
    if (index >= dim) throw ConfigError("basis index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return StateVector(std::move(v));
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(amplitudes_.size());
  }
  std::size_t qubits() const noexcept {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dimension()) ++n;
    return n;
  }

  Complex inner(const StateVector& other) const {
    if (other.dimension() != dimension()) {
      throw ConfigError("state dimension mismatch");
    }
    return amplitudes_.dot(other.amplitudes_);
  }

  StateVector with_phase(Complex phase) const {
    return StateVector(amplitudes_ * phase);
  }

 private:
  explicit StateVector(Vector v) : amplitudes_(std::move(v)) {}

  static void check_dimension(Eigen::Index size) {
    const auto dim = static_cast<std::size_t>(size);
    if (dim < 2 || (dim & (dim - 1)) != 0) {
      throw ConfigError("state dimension must be a power of two >= 2");
    }
  }

  Vector amplitudes_;
};

}  // namespace aqaoa
