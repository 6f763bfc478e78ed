#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ddmb/estimators.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/resampling.hpp"
#include "ddmb/survival_data.hpp"

namespace ddmb {

enum class BandType { HallWellner, EqualPrecision };
enum class Transform { LogLog, Identity };

std::string_view to_string(BandType type);
std::string_view to_string(Transform transform);
/// "hw" | "ep"
BandType parse_band_type(std::string_view name);
/// "loglog" | "identity"
Transform parse_transform(std::string_view name);

/// Order statistic of rank ceil((1 - alpha)(B + 1)), clamped to [1, B].
double empirical_quantile(std::vector<double> values, double alpha);

/// Per-grid-point factor g(t) * phi'(F1_hat(t)) that turns a bootstrap path
/// into the transformed process gamma_hat. Throws InadmissibleError where
/// the transformation is undefined (F1_hat in {0, 1} for log-log, or
/// sigma_hat = 0 for equal-precision weights).
std::vector<double> gamma_factors(std::span<const double> f1, std::span<const double> sigma2, BandType type,
                                  Transform transform);

/// Weight function g(t) alone.
double band_weight(double f1, double sigma2, BandType type);

/// Pointwise product of each path with gamma_factors.
BootstrapPaths gamma_paths(const BootstrapPaths& paths, const ZComponents& z, MultiplierScheme scheme, BandType type,
                           Transform transform);

struct ConfidenceBand {
  std::vector<double> grid;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> sigma2;
  BandType band_type = BandType::EqualPrecision;
  Transform transform = Transform::LogLog;
  MultiplierScheme scheme = MultiplierScheme::WeirdBinomial;
  double t1 = 0.0;
  double t2 = 0.0;
  double quantile_q = 0.0;
  double alpha = 0.05;
  double area = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Band boundaries for a given critical value q:
/// log-log: 1 - (1 - F)^exp(+-q / (sqrt(n) g)); identity: F +- q / (sqrt(n) |g|).
/// Results are clamped into [0, 1].
void fill_band(ConfidenceBand& band, double q);

/// Step-area of the band over [t1, t2].
double band_area(const ConfidenceBand& band);

/// Curve to be checked against a band. Non-decreasing curves only: checks
/// happen at the start of every band piece, at every listed jump, and at the
/// left limit of every piece end.
struct ReferenceCurve {
  std::function<double(double)> value;
  std::function<double(double)> left_limit;
  std::vector<double> jumps;

  static ReferenceCurve continuous(std::function<double(double)> f);
  static ReferenceCurve step(const StepFunction& f);
};

/// Largest |gamma_n| = sqrt(n) |g| |phi(F1_hat) - phi(F)| over the check
/// points of the band. Infinite if F leaves the domain of phi.
double containment_statistic(const ConfidenceBand& band, const ReferenceCurve& reference);
bool band_contains(const ConfidenceBand& band, const ReferenceCurve& reference);

struct BandRequest {
  double t1 = 0.5;
  double t2 = 5.0;
  MultiplierScheme scheme = MultiplierScheme::WeirdBinomial;
  BandType band_type = BandType::EqualPrecision;
  Transform transform = Transform::LogLog;
  std::size_t replicates = 999;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

/// Checks F1_hat(t1) > 0, F1_hat(t2) < 1 and Y(t2) > 0, throwing
/// InadmissibleError with a hint otherwise.
void check_band_interval(const ZComponents& z, double t1, double t2);

/// Simultaneous band for F1 on [t1, t2]. The cohort is tie-broken first.
ConfidenceBand confidence_band(const Cohort& cohort, const BandRequest& request);
ConfidenceBand confidence_band(const ZComponents& z, const BandRequest& request);

/// Sup-functionals of several transformed processes computed from one set of
/// replicates: result[k][b] = max_g |factors[k][g] * path_b(g)|.
std::vector<std::vector<double>> replicate_sups(const ZComponents& z, MultiplierScheme scheme,
                                                const std::vector<double>& grid,
                                                const std::vector<std::vector<double>>& factors, std::size_t B,
                                                std::uint64_t seed, std::size_t threads);

/// Band on the singleton grid {s}.
ConfidenceBand pointwise_ci(const Cohort& cohort, double s, const BandRequest& request);

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  double alpha = 0.05;
  bool reject = false;
  std::vector<double> replicate_stats;
  double p_value = 1.0;
  double adjustment = 1.0;
};

/// (1 + #{replicate >= statistic}) / (B + 1).
double resampling_p_value(std::span<const double> replicate_stats, double statistic);
TestResult make_test_result(double statistic, std::vector<double> replicate_stats, double alpha);

/// Containment test of H: F1 = reference on [t1, t2]; rejects iff the
/// reference leaves the simultaneous band.
TestResult one_sample_ks(const Cohort& cohort, const ReferenceCurve& reference, const BandRequest& request);

/// Positive weight function for the two-sample statistics; constant or a
/// right-continuous step function.
class WeightFunction {
 public:
  static WeightFunction constant(double c);
  static WeightFunction step(StepFunction f);

  double operator()(double t) const;
  /// sup of w over [a, b) (over [a, b] when closed_right).
  double sup_on(double a, double b, bool closed_right) const;
  double inf_on(double a, double b) const;
  double integral(double a, double b) const;
  WeightFunction scaled(double c) const;

 private:
  StepFunction f_;
};

struct TwoSampleRequest {
  double t1 = 0.5;
  double t2 = 5.0;
  MultiplierScheme scheme = MultiplierScheme::WeirdBinomial;
  std::size_t replicates = 999;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Adjustment adjust = Adjustment::None;
  std::size_t threads = 0;
  WeightFunction weight = WeightFunction::constant(1.0);
};

struct TwoSampleResult {
  TestResult ks;
  TestResult cvm;
  std::vector<double> grid;
  std::vector<double> difference;  // W_{n1,n2} on the grid
};

/// KS and CvM tests from one shared set of replicates.
TwoSampleResult two_sample_tests(const ZComponents& z1, const ZComponents& z2, const TwoSampleRequest& request);
TwoSampleResult two_sample_tests(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request);

/// sup w |W_{n1,n2}| versus the bootstrap quantile.
TestResult two_sample_ks(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request);
/// integral of w W_{n1,n2}^2 over [t1, t2] versus the bootstrap quantile.
TestResult two_sample_cvm(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request);

/// KS and CvM functionals of one step path on grid pieces [g_k, g_{k+1})
/// and [g_last, t2].
double ks_functional(std::span<const double> grid, std::span<const double> path, double t2, const WeightFunction& w);
double cvm_functional(std::span<const double> grid, std::span<const double> path, double t2, const WeightFunction& w);

}  // namespace ddmb
