#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ddmb/estimators.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/survival_data.hpp"

namespace ddmb {

/// Linear decomposition of the bootstrapped Aalen-Johansen process for F1.
///
/// Every subject with an observed event owns exactly one active slot, and
/// its component is
///
///   Z_i(s) = 1(T_i <= s) * (coef_const_i + coef_f1_i * F1_hat(s))
///
/// with coef_f1_i = -1/Y(T_i) and coef_const_i = S2_hat(T_i-)/Y(T_i) for
/// cause-1 slots or F1_hat(T_i-)/Y(T_i) for cause-2 slots. Slots are stored
/// in increasing jump-time order; censored subjects have no slot (Z = 0).
struct ZComponents {
  std::size_t n = 0;  // cohort size
  std::vector<double> jump_time;
  std::vector<Cause> cause;
  std::vector<std::size_t> subject;
  std::vector<std::int64_t> at_risk;
  std::vector<double> coef_const;
  std::vector<double> coef_f1;
  StepFunction f1;
  std::vector<double> sorted_entries;
  std::vector<double> sorted_exits;

  std::size_t size() const { return jump_time.size(); }
  /// Z of one slot at time s.
  double value(std::size_t slot, double s) const;
  std::int64_t at_risk_at(double t) const;
  WeightSampler sampler(MultiplierScheme scheme) const { return WeightSampler(scheme, at_risk); }
};

ZComponents precompute_z(const RiskTable& rt);
/// Tie-breaks the cohort, builds its risk table and precomputes Z.
ZComponents prepare_components(const Cohort& cohort);

/// {t1} plus every event time of the given components in (t1, t2], sorted.
/// Throws InadmissibleError("no events in interval") when the interval holds
/// no event (or, for t1 == t2, no event has occurred by t1).
std::vector<double> interval_grid(std::span<const ZComponents* const> groups, double t1, double t2);
std::vector<double> interval_grid(const ZComponents& z, double t1, double t2);

/// Evaluates sum_i w_i Z_i(g) on a fixed grid in O(slots + grid) using the
/// running sums A(g) = sum_{T_i <= g} w_i coef_const_i and
/// C(g) = sum_{T_i <= g} w_i / Y(T_i), so that the sum is A(g) - F1(g) C(g).
class PathEvaluator {
 public:
  PathEvaluator(const ZComponents& z, std::vector<double> grid);

  const std::vector<double>& grid() const { return grid_; }
  const ZComponents& components() const { return *z_; }

  /// out[g] += scale * sum_i weights[i] * Z_i(grid[g]).
  void accumulate(std::span<const double> weights, double scale, std::span<double> out) const;

 private:
  const ZComponents* z_;
  std::vector<double> grid_;
  std::vector<double> f1_at_grid_;
  std::vector<std::size_t> slots_through_;  // #slots with jump_time <= grid[g]
};

enum class Adjustment { None, Count, Risk };

std::string_view to_string(Adjustment adjust);
Adjustment parse_adjustment(std::string_view name);

/// Conservative weight inflation factor for two-sample tests:
/// Count -> 1 + |n1 - n2| / (n1 n2); Risk -> 1 + |Y1 - Y2| / (Y1 Y2) at t2.
double adjustment_factor(Adjustment adjust, const ZComponents& z1, const ZComponents& z2, double t2);

/// One group's contribution to a replicate path.
struct PathComponent {
  const PathEvaluator* evaluator = nullptr;
  const WeightSampler* sampler = nullptr;
  std::uint64_t stream_tag = 1;
};

/// Stream used for replicate b of the component tagged `tag`.
Stream replicate_stream(std::uint64_t seed, std::size_t replicate, std::uint64_t tag);

/// Streaming replicate loop: for each b in [0, B) draws every component's
/// weights from replicate_stream(seed, b, tag), forms
/// path = scale * sum_components sum_i w_i Z_i on the shared grid, and calls
/// visit(b, path). Replicates run in parallel; visit must only write state
/// owned by index b.
void for_each_replicate(std::span<const PathComponent> components, double scale, std::size_t B,
                        std::uint64_t seed, std::size_t threads,
                        const std::function<void(std::size_t, std::span<const double>)>& visit);

/// Materialized replicate paths, B x grid, row-major.
struct BootstrapPaths {
  std::vector<double> grid;
  std::size_t replicates = 0;
  std::vector<double> values;
  std::vector<std::uint64_t> stream_keys;  // key of each replicate's (first) stream
  double scale = 1.0;

  std::span<const double> path(std::size_t b) const {
    return {values.data() + b * grid.size(), grid.size()};
  }
};

/// sqrt(n) * sum_i D_i Z_i on interval_grid(z, t1, t2) for B replicates.
BootstrapPaths one_sample_paths(const ZComponents& z, MultiplierScheme scheme, std::size_t B, double t1, double t2,
                                std::uint64_t seed, std::size_t threads = 0);

/// sqrt(n1 n2 / n) * (sum D1 Z1 + sum D2 Z2) on the merged grid, weights
/// multiplied by adjustment_factor(adjust, ...).
BootstrapPaths two_sample_paths(const ZComponents& z1, const ZComponents& z2, MultiplierScheme scheme, std::size_t B,
                                double t1, double t2, std::uint64_t seed, Adjustment adjust = Adjustment::None,
                                std::size_t threads = 0);

/// Closed-form conditional covariance n * sum_i sigma_i^2 Z_i(s) Z_i(t) of
/// the one-sample bootstrap process.
double bootstrap_covariance(const ZComponents& z, MultiplierScheme scheme, double s, double t);

/// Conditional variance n * sum_i sigma_i^2 Z_i(g)^2 at every grid point.
std::vector<double> bootstrap_variance(const ZComponents& z, MultiplierScheme scheme, std::span<const double> grid);

/// sigma_hat^2(t) = conditional variance at t / (1 - F1_hat(t))^2.
/// Throws InadmissibleError when F1_hat(t) = 1.
double sigma2_hat(const ZComponents& z, MultiplierScheme scheme, double t);
std::vector<double> sigma2_hat(const ZComponents& z, MultiplierScheme scheme, std::span<const double> grid);

}  // namespace ddmb
