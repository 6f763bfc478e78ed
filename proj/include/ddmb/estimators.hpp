#pragma once

#include <cstddef>
#include <vector>

#include "ddmb/survival_data.hpp"

namespace ddmb {

/// Right-continuous step function: value_before_first on [0, times[0]) and
/// values[k] on [times[k], times[k+1]).
struct StepFunction {
  std::vector<double> times;
  std::vector<double> values;
  double value_before_first = 0.0;

  double operator()(double t) const;
  double left_limit(double t) const;
  std::size_t size() const { return times.size(); }
};

/// Product-limit estimate of P(T > t) for the all-cause event time.
StepFunction kaplan_meier(const RiskTable& rt);

/// Cause-specific cumulative hazard, sum of dN_j / Y.
StepFunction nelson_aalen(const RiskTable& rt, Cause cause);

/// Cumulative incidence of `cause`: sum over event times of
/// P(T > t_k-) dN_j(t_k) / Y(t_k).
StepFunction aalen_johansen(const RiskTable& rt, Cause cause);

/// Plug-in estimate of the limiting covariance of sqrt(n)(F1_hat - F1) at
/// (s1, s2). Arguments may be given in either order. Throws
/// std::out_of_range if either time is negative or beyond the last exit.
double zeta_plugin(const RiskTable& rt, double s1, double s2);

/// Symmetric matrix of covariance values on a time grid, row-major.
struct CovarianceGrid {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * times.size() + j]; }
};

CovarianceGrid zeta_grid(const RiskTable& rt, const std::vector<double>& times);

}  // namespace ddmb
