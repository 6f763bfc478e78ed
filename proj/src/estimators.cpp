#include "ddmb/estimators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ddmb {

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return value_before_first;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return value_before_first;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepFunction kaplan_meier(const RiskTable& rt) {
  StepFunction km{rt.times, {}, 1.0};
  km.values.reserve(rt.size());
  double surv = 1.0;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    const double d = rt.dN1[k] + rt.dN2[k];
    if (rt.at_risk[k] > 0 && d > 0) surv -= surv * d / static_cast<double>(rt.at_risk[k]);
    km.values.push_back(surv);
  }
  return km;
}

namespace {

const std::vector<std::uint8_t>& increments(const RiskTable& rt, Cause cause) {
  switch (cause) {
    case Cause::Event1: return rt.dN1;
    case Cause::Event2: return rt.dN2;
    default: break;
  }
  throw std::invalid_argument("cause must be Event1 or Event2");
}

}  // namespace

StepFunction nelson_aalen(const RiskTable& rt, Cause cause) {
  const auto& dN = increments(rt, cause);
  StepFunction na{rt.times, {}, 0.0};
  na.values.reserve(rt.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    if (rt.at_risk[k] > 0 && dN[k] > 0) cum += dN[k] / static_cast<double>(rt.at_risk[k]);
    na.values.push_back(cum);
  }
  return na;
}

StepFunction aalen_johansen(const RiskTable& rt, Cause cause) {
  const auto& dN = increments(rt, cause);
  StepFunction cif{rt.times, {}, 0.0};
  cif.values.reserve(rt.size());
  double surv = 1.0;  // P(T > t_k-)
  double cum = 0.0;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    const double d = rt.dN1[k] + rt.dN2[k];
    if (rt.at_risk[k] > 0) {
      const double y = static_cast<double>(rt.at_risk[k]);
      if (dN[k] > 0) cum += surv * dN[k] / y;
      if (d > 0) surv -= surv * d / y;
    }
    cif.values.push_back(cum);
  }
  return cif;
}

double zeta_plugin(const RiskTable& rt, double s1, double s2) {
  if (s1 > s2) std::swap(s1, s2);
  const double last = rt.times.empty() ? 0.0 : rt.times.back();
  if (s1 < 0.0 || s2 > last)
    throw std::out_of_range("zeta_plugin: time outside observed range [0, " + std::to_string(last) + "]");
  const StepFunction f1 = aalen_johansen(rt, Cause::Event1);
  const StepFunction f2 = aalen_johansen(rt, Cause::Event2);
  const double f1_s1 = f1(s1);
  const double f1_s2 = f1(s2);
  const double n = static_cast<double>(rt.n_subjects);
  double f1_prev = 0.0;
  double f2_prev = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < rt.size() && rt.times[k] <= s1; ++k) {
    if (rt.at_risk[k] > 0 && rt.is_event(k)) {
      const double y = static_cast<double>(rt.at_risk[k]);
      // alpha_j du / y(u) -> n dN_j / Y^2
      const double scale = n / (y * y);
      if (rt.dN1[k]) sum += scale * (1.0 - f2_prev - f1_s2) * (1.0 - f2_prev - f1_s1);
      if (rt.dN2[k]) sum += scale * (f1_prev - f1_s2) * (f1_prev - f1_s1);
    }
    f1_prev = f1.values[k];
    f2_prev = f2.values[k];
  }
  return sum;
}

CovarianceGrid zeta_grid(const RiskTable& rt, const std::vector<double>& times) {
  CovarianceGrid grid{times, std::vector<double>(times.size() * times.size(), 0.0)};
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t j = i; j < times.size(); ++j) {
      const double v = zeta_plugin(rt, times[i], times[j]);
      grid.values[i * times.size() + j] = v;
      grid.values[j * times.size() + i] = v;
    }
  return grid;
}

}  // namespace ddmb
