#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddmb/rng.hpp"
#include "ddmb/survival_data.hpp"

namespace ddmb {

enum class MultiplierScheme {
  StandardNormal,    // i.i.d. N(0,1)
  CenteredPoisson1,  // i.i.d. Poisson(1) - 1
  WeirdBinomial,     // Binomial(Y(T_i), 1/Y(T_i)) - 1, independent given the data
};

std::string_view to_string(MultiplierScheme scheme);
/// Accepts "normal", "poisson", "weird". Throws std::invalid_argument.
MultiplierScheme parse_scheme(std::string_view name);

/// Weights over the 2n slots: slot i (< n) is the cause-1 component of
/// subject i, slot n + i its cause-2 component. A slot is active iff the
/// subject has an observed event of that cause; inactive slots hold 0.
struct WeightDraw {
  std::vector<double> weights;
  std::vector<std::uint8_t> slot_active;
};

/// Draws one weight vector from `rng`. Active slots are filled in event-time
/// order, the same order the resampling engine uses.
WeightDraw draw_weights(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort, Stream& rng);

/// Conditional moments of a slot weight given the data.
struct SlotMoments {
  bool active = false;
  double mean = 0.0;
  double variance = 0.0;
  double fourth = 0.0;  // E[D^4 | data]
};

/// Per-slot moments, indexed like WeightDraw.
std::vector<SlotMoments> conditional_moments(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort);

/// Closed-form moments for a slot whose subject exits with `at_risk` subjects
/// at risk (at_risk is ignored by the data-independent schemes).
SlotMoments slot_moments(MultiplierScheme scheme, std::int64_t at_risk);

struct DiagnosticThresholds {
  double mean = 1e-8;
  double variance = 0.1;
  // fourth moments are reported but not gated unless set
  double fourth = std::numeric_limits<double>::infinity();
};

/// Finite-sample surrogates of the moment conditions a multiplier scheme
/// must satisfy for the bootstrap to be consistent.
struct ConditionDiagnostics {
  std::size_t n = 0;
  std::size_t active_slots = 0;
  double max_abs_mean_sqrt_n = 0.0;  // max |mu_i| * sqrt(n)
  double max_variance_gap = 0.0;     // max |sigma_i^2 - 1|
  double max_fourth_over_n = 0.0;    // max E[D_i^4] / n
  std::int64_t min_at_risk = 0;      // smallest Y(T_i) over active slots
  bool mean_flag = false;
  bool variance_flag = false;
  bool fourth_flag = false;

  bool ok() const { return !mean_flag && !variance_flag && !fourth_flag; }
};

ConditionDiagnostics diagnose_conditions(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort,
                                         const DiagnosticThresholds& thresholds = {});

/// Compact weight generator over the active slots only, in event-time order.
/// This is what the resampling engine calls once per replicate.
class WeightSampler {
 public:
  WeightSampler(MultiplierScheme scheme, std::vector<std::int64_t> at_risk);

  MultiplierScheme scheme() const { return scheme_; }
  std::size_t size() const { return at_risk_.size(); }
  double variance(std::size_t slot) const;

  void draw(Stream& rng, std::span<double> out) const;

 private:
  MultiplierScheme scheme_;
  std::vector<std::int64_t> at_risk_;
  std::vector<double> p0_;  // P(Binomial(Y, 1/Y) = 0)
};

/// Exact Binomial(trials, 1/trials) sample by inversion.
std::int64_t sample_weird_binomial(Stream& rng, std::int64_t trials, double p0);

}  // namespace ddmb
