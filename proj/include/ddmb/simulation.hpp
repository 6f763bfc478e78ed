#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ddmb/inference.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/rng.hpp"
#include "ddmb/survival_data.hpp"

namespace ddmb {

/// Competing-risks data with constant cause-specific hazards, independent
/// exponential censoring and administrative censoring at admin_end.
struct DGPSpec {
  double hazard1 = 1.0;
  double hazard2 = 1.0;
  double censor_rate = 0.0;
  double admin_end = 5.0;
  std::size_t n = 100;
  std::uint64_t seed = 1;
};

/// Percentages of cause-1 events, cause-2 events and censorings.
struct EventMix {
  double event1 = 0.0;
  double event2 = 0.0;
  double censored = 0.0;
};

/// Default target mix of cause-1 events, cause-2 events and censorings.
inline constexpr EventMix kSurrogateMix{38.68, 20.06, 41.26};
/// Default share of subjects still at risk just before the administrative end.
inline constexpr double kAtRiskAtEnd = 51.0 / 636.0;

/// Throws std::invalid_argument for negative rates or zero event hazard.
void validate(const DGPSpec& spec);

/// Closed-form expected mix of a spec.
EventMix expected_mix(const DGPSpec& spec);
EventMix observed_mix(const Cohort& cohort);

/// True cumulative incidence a_j / (a_1 + a_2) * (1 - exp(-(a_1 + a_2) t)).
double true_cif(const DGPSpec& spec, Cause cause, double t);

/// Rates (hazard1, hazard2, censor_rate) reproducing `target`. The mix fixes
/// the rates only up to their overall scale, which is pinned by the share of
/// subjects still at risk at admin_end (ignored, and the total rate set to 1,
/// when admin_end is infinite). Throws std::invalid_argument for infeasible
/// targets.
DGPSpec calibrate_rates(const EventMix& target, double admin_end = 5.0, double at_risk_at_end = kAtRiskAtEnd);

/// Surrogate spec calibrated to kSurrogateMix and kAtRiskAtEnd, of size n.
DGPSpec surrogate_spec(std::size_t n, std::uint64_t seed);

/// Deterministic under spec.seed; ties (administrative censoring) broken.
Cohort generate_cohort(const DGPSpec& spec);

struct CoverageConfig {
  DGPSpec spec = surrogate_spec(100, 1);  // n and seed are overridden per run
  std::vector<std::size_t> n_list{50, 100, 300, 636};
  std::vector<MultiplierScheme> schemes{MultiplierScheme::StandardNormal, MultiplierScheme::CenteredPoisson1,
                                        MultiplierScheme::WeirdBinomial};
  std::vector<BandType> band_types{BandType::HallWellner, BandType::EqualPrecision};
  Transform transform = Transform::LogLog;
  std::size_t n_sim = 1000;
  std::size_t replicates = 999;
  double t1 = 0.5;
  double t2 = 5.0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct CoverageCell {
  std::size_t n = 0;
  MultiplierScheme scheme = MultiplierScheme::WeirdBinomial;
  BandType band_type = BandType::EqualPrecision;
  std::size_t runs = 0;
  std::size_t covered = 0;
  std::size_t inadmissible = 0;  // counted as not covered
  double coverage = 0.0;         // per cent
  double mean_area = 0.0;        // over admissible runs
};

struct StudyReport {
  CoverageConfig config;
  std::vector<CoverageCell> cells;
  EventMix mix;  // pooled over every generated cohort

  const CoverageCell& cell(std::size_t n, MultiplierScheme scheme, BandType type) const;
};

/// Fraction of simulated data sets whose band contains the true F1 on the
/// whole interval. Runs in parallel over simulation runs; for one n and run
/// all schemes and band types share the cohort, and all band types of one
/// scheme share the replicates.
StudyReport coverage_study(const CoverageConfig& config);

struct SizePowerConfig {
  DGPSpec null_spec = surrogate_spec(200, 1);
  DGPSpec alt_spec = surrogate_spec(200, 1);
  std::size_t n1 = 200;
  std::size_t n2 = 200;
  MultiplierScheme scheme = MultiplierScheme::WeirdBinomial;
  Adjustment adjust = Adjustment::None;
  std::size_t n_sim = 2000;
  std::size_t replicates = 999;
  double t1 = 0.5;
  double t2 = 5.0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool run_null = true;
  bool run_alternative = true;
};

struct RejectionRates {
  std::size_t runs = 0;
  std::size_t inadmissible = 0;  // counted as non-rejections
  std::size_t ks_rejections = 0;
  std::size_t cvm_rejections = 0;
  double ks = 0.0;   // per cent
  double cvm = 0.0;  // per cent
};

struct SizePowerReport {
  SizePowerConfig config;
  RejectionRates null_rates;
  RejectionRates alt_rates;
};

/// Rejection rates of the two-sample KS and CvM tests with both groups from
/// null_spec (size) and with group 2 from alt_spec (power).
SizePowerReport size_power_study(const SizePowerConfig& config);

}  // namespace ddmb
