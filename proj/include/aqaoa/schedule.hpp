#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aqaoa/core.hpp"

namespace aqaoa {

/// Annealing schedule lambda(x) on [0, 1]: a monotone piece-wise cubic Hermite
/// interpolant through uniform knots (k/N, p_k) with p_0 = 0 and p_N = 1.
///
/// Interior tangents follow Fritsch-Carlson (zero at a local extremum of the
/// knot sequence, harmonic mean of the adjacent secants otherwise). Endpoint
/// tangents use the one-sided three-point formula clamped to [0, 3 * secant].
/// Every segment is therefore monotone and lambda is C^1. Interior values are
/// free reals; the schedule may leave [0, 1] between the endpoints.
class Schedule {
 public:
  /// The linear schedule lambda(x) = x.
  Schedule() : Schedule(std::span<const double>{}) {}

  explicit Schedule(std::span<const double> interior) {
    for (double v : interior) {
      if (!std::isfinite(v)) throw ConfigError("schedule: non-finite knot value");
    }
    values_.reserve(interior.size() + 2);
    values_.push_back(0.0);
    values_.insert(values_.end(), interior.begin(), interior.end());
    values_.push_back(1.0);
    compute_tangents();
  }

  explicit Schedule(const std::vector<double>& interior)
      : Schedule(std::span<const double>(interior)) {}

  static Schedule linear() { return Schedule(); }

  std::size_t segments() const noexcept { return values_.size() - 1; }
  std::size_t free_parameters() const noexcept { return values_.size() - 2; }
  const std::vector<double>& knot_values() const noexcept { return values_; }
  const std::vector<double>& tangents() const noexcept { return tangents_; }
  std::vector<double> interior() const {
    return {values_.begin() + 1, values_.end() - 1};
  }
  double knot_position(std::size_t k) const noexcept {
    return static_cast<double>(k) / static_cast<double>(segments());
  }

  double operator()(double x) const { return eval(x); }

  double eval(double x) const {
    check_domain(x);
    if (x == 1.0) return values_.back();
    const auto [k, t] = locate(x);
    const double a = values_[k], b = values_[k + 1];
    if (t == 0.0) return a;
    const auto [c1, c2, c3] = coefficients(k);
    const double v = a + t * (c1 + t * (c2 + t * c3));
    // The cubic is monotone on the segment; clamp away rounding excursions.
    return std::clamp(v, std::min(a, b), std::max(a, b));
  }

  double eval_derivative(double x) const {
    check_domain(x);
    const auto [k, t] = derivative_locate(x);
    return segment_derivative(k, t);
  }

  /// Derivative of segment k's cubic at local coordinate t in [0, 1]; used to
  /// compare one-sided limits at knots.
  double segment_derivative(std::size_t k, double t) const {
    const auto [c1, c2, c3] = coefficients(k);
    return (c1 + t * (2.0 * c2 + 3.0 * t * c3)) * static_cast<double>(segments());
  }

  /// `count` evenly spaced samples (x, lambda(x)) including both endpoints.
  std::vector<std::pair<double, double>> sample(std::size_t count) const {
    if (count < 2) count = 2;
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double x = i + 1 == count ? 1.0 : static_cast<double>(i) / (count - 1);
      out.emplace_back(x, eval(x));
    }
    return out;
  }

 private:
  struct Cubic {
    double c1, c2, c3;
  };

  static void check_domain(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ConfigError("schedule evaluated outside [0, 1]: " + std::to_string(x));
    }
  }

  std::pair<std::size_t, double> locate(double x) const {
    const auto n = segments();
    const double u = x * static_cast<double>(n);
    auto k = static_cast<std::size_t>(u);
    if (k >= n) k = n - 1;
    return {k, u - static_cast<double>(k)};
  }

  // At x == 1 the last segment is used; elsewhere the segment to the right.
  std::pair<std::size_t, double> derivative_locate(double x) const {
    const auto [k, t] = locate(x);
    return {k, std::min(t, 1.0)};
  }

  // Local form on t in [0,1]: v(t) = p_k + c1 t + c2 t^2 + c3 t^3.
  Cubic coefficients(std::size_t k) const {
    const double h = 1.0 / static_cast<double>(segments());
    const double dp = values_[k + 1] - values_[k];
    const double m0 = h * tangents_[k], m1 = h * tangents_[k + 1];
    return {m0, 3.0 * dp - 2.0 * m0 - m1, m0 + m1 - 2.0 * dp};
  }

  void compute_tangents() {
    const std::size_t n = segments();
    const double scale = static_cast<double>(n);
    std::vector<double> secant(n);
    for (std::size_t k = 0; k < n; ++k) secant[k] = (values_[k + 1] - values_[k]) * scale;

    tangents_.assign(n + 1, 0.0);
    if (n == 1) {
      tangents_[0] = tangents_[1] = secant[0];
      return;
    }
    for (std::size_t k = 1; k < n; ++k) {
      const double l = secant[k - 1], r = secant[k];
      tangents_[k] = l * r <= 0.0 ? 0.0 : 2.0 / (1.0 / l + 1.0 / r);
    }
    tangents_[0] = endpoint_tangent(secant[0], secant[1]);
    tangents_[n] = endpoint_tangent(secant[n - 1], secant[n - 2]);
  }

  static double endpoint_tangent(double adjacent, double next) {
    const double m = 0.5 * (3.0 * adjacent - next);
    if (adjacent == 0.0 || m * adjacent <= 0.0) return 0.0;
    if (std::abs(m) > 3.0 * std::abs(adjacent)) return 3.0 * adjacent;
    return m;
  }

  std::vector<double> values_;
  std::vector<double> tangents_;
};

/// Schedules serialize as the JSON array of their interior knot values.
inline nlohmann::json to_json(const Schedule& s) { return s.interior(); }

inline Schedule schedule_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("schedule: expected a JSON array of numbers");
  std::vector<double> interior;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("schedule: knot values must be numbers");
    interior.push_back(v.get<double>());
  }
  return Schedule(interior);
}

}  // namespace aqaoa
