#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ddmb/error.hpp"
#include "ddmb/inference.hpp"
#include "ddmb/simulation.hpp"
#include "support.hpp"

using namespace ddmb;
using ddmb::testing::make_cohort;

namespace {

Cohort demo_cohort(std::size_t n = 300, std::uint64_t seed = 41) { return generate_cohort(surrogate_spec(n, seed)); }

BandRequest small_request() {
  BandRequest r;
  r.replicates = 499;
  r.seed = 3;
  r.threads = 1;
  return r;
}

}  // namespace

TEST_CASE("quantile rank rule") {
  std::vector<double> values(999);
  std::iota(values.begin(), values.end(), 1.0);
  std::reverse(values.begin(), values.end());
  CHECK(empirical_quantile(values, 0.05) == 950.0);
  CHECK(empirical_quantile({7.5}, 0.05) == 7.5);
  CHECK(empirical_quantile({7.5}, 0.9) == 7.5);
  CHECK(empirical_quantile(std::vector<double>(20, 2.0), 0.05) == 2.0);
  CHECK(empirical_quantile({1, 2, 3}, 1.0) == 1.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.05), std::invalid_argument);
}

TEST_CASE("log-log slope vanishes the transform at 1 - 1/e") {
  const double f = 1.0 - std::exp(-1.0);
  CHECK(std::abs(std::log(-std::log(1.0 - f))) < 1e-15);
  const std::vector<double> f1{f}, s2{0.2};
  const auto factor = gamma_factors(f1, s2, BandType::HallWellner, Transform::LogLog);
  CHECK(factor[0] == doctest::Approx(band_weight(f, 0.2, BandType::HallWellner) / ((1 - f) * 1.0)));
  CHECK_THROWS_AS(gamma_factors(std::vector<double>{0.0}, s2, BandType::HallWellner, Transform::LogLog),
                  InadmissibleError);
  CHECK_THROWS_AS(gamma_factors(f1, std::vector<double>{0.0}, BandType::EqualPrecision, Transform::LogLog),
                  InadmissibleError);
}

TEST_CASE("gamma paths match a per-point recomputation") {
  const ZComponents z = prepare_components(demo_cohort());
  const BootstrapPaths paths = one_sample_paths(z, MultiplierScheme::WeirdBinomial, 20, 0.5, 4.5, 8, 1);
  const BootstrapPaths gamma = gamma_paths(paths, z, MultiplierScheme::WeirdBinomial, BandType::EqualPrecision,
                                           Transform::LogLog);
  for (std::size_t b = 0; b < 20; ++b) {
    double sup_fast = 0.0, sup_naive = 0.0;
    for (std::size_t g = 0; g < paths.grid.size(); ++g) {
      const double t = paths.grid[g];
      const double f = z.f1(t);
      const double s2 = sigma2_hat(z, MultiplierScheme::WeirdBinomial, t);
      const double factor = std::log(1 - f) / std::sqrt(s2) / ((1 - f) * -std::log(1 - f));
      sup_naive = std::max(sup_naive, std::abs(factor * paths.path(b)[g]));
      sup_fast = std::max(sup_fast, std::abs(gamma.path(b)[g]));
    }
    CHECK(std::abs(sup_fast - sup_naive) <= 1e-10);
  }
  std::vector<double> zero(paths.values.size(), 0.0);
  BootstrapPaths zp = paths;
  zp.values = zero;
  CHECK(gamma_paths(zp, z, MultiplierScheme::WeirdBinomial, BandType::HallWellner, Transform::LogLog).values == zero);
}

TEST_CASE("band with q = 0 collapses onto the estimate") {
  ConfidenceBand band = confidence_band(demo_cohort(), small_request());
  fill_band(band, 0.0);
  CHECK(band.lower == band.estimate);
  CHECK(band.upper == band.estimate);
  CHECK(band.area == 0.0);
}

TEST_CASE("band area is the step area") {
  ConfidenceBand band;
  band.grid = {1.0, 2.0, 4.0};
  band.lower = {0.1, 0.1, 0.1};
  band.upper = {0.3, 0.3, 0.3};
  band.t2 = 5.0;
  CHECK(band_area(band) == doctest::Approx(0.2 * 4.0));
  band.upper = {0.2, 0.5, 0.3};
  CHECK(band_area(band) == doctest::Approx(0.1 * 1 + 0.4 * 2 + 0.2 * 1));
}

TEST_CASE("band structure") {
  const ConfidenceBand band = confidence_band(demo_cohort(), small_request());
  CHECK(band.grid.front() == 0.5);
  CHECK(band.quantile_q > 0.0);
  CHECK(band.area > 0.0);
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    CHECK(band.lower[k] <= band.estimate[k]);
    CHECK(band.estimate[k] <= band.upper[k]);
    CHECK(band.lower[k] >= 0.0);
    CHECK(band.upper[k] <= 1.0);
  }
  CHECK(band.area == doctest::Approx(band_area(band)));
}

TEST_CASE("bands are nested in alpha and deterministic") {
  const Cohort c = demo_cohort();
  BandRequest r05 = small_request();
  BandRequest r10 = r05;
  r10.alpha = 0.10;
  const ConfidenceBand wide = confidence_band(c, r05);
  const ConfidenceBand narrow = confidence_band(c, r10);
  CHECK(narrow.quantile_q <= wide.quantile_q);
  for (std::size_t k = 0; k < wide.grid.size(); ++k) {
    CHECK(narrow.lower[k] >= wide.lower[k]);
    CHECK(narrow.upper[k] <= wide.upper[k]);
  }
  BandRequest threaded = r05;
  threaded.threads = 4;
  const ConfidenceBand again = confidence_band(c, threaded);
  CHECK(again.lower == wide.lower);
  CHECK(again.upper == wide.upper);
}

TEST_CASE("identity transform and Hall-Wellner weights") {
  BandRequest r = small_request();
  r.transform = Transform::Identity;
  r.band_type = BandType::HallWellner;
  const ConfidenceBand band = confidence_band(demo_cohort(), r);
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    const double half_up = band.upper[k] - band.estimate[k];
    const double half_down = band.estimate[k] - band.lower[k];
    if (band.lower[k] > 0.0 && band.upper[k] < 1.0) CHECK(half_up == doctest::Approx(half_down));
  }
}

TEST_CASE("pointwise interval lies inside the simultaneous band") {
  const Cohort c = demo_cohort();
  const BandRequest r = small_request();
  const ConfidenceBand band = confidence_band(c, r);
  for (double s : {0.8, 1.7, 3.2, 4.9}) {
    const ConfidenceBand ci = pointwise_ci(c, s, r);
    const auto k = static_cast<std::size_t>(std::upper_bound(band.grid.begin(), band.grid.end(), s) -
                                            band.grid.begin() - 1);
    CHECK(ci.quantile_q <= band.quantile_q);
    CHECK(ci.lower.front() >= band.lower[k] - 1e-15);
    CHECK(ci.upper.front() <= band.upper[k] + 1e-15);
    CHECK(ci.lower.front() >= 0.0);
    CHECK(ci.upper.front() <= 1.0);
    ConfidenceBand degenerate = ci;
    fill_band(degenerate, 0.0);
    CHECK(degenerate.lower.front() == ci.estimate.front());
  }
}

TEST_CASE("inadmissible intervals") {
  const Cohort c = demo_cohort();
  BandRequest r = small_request();
  r.t1 = 0.0;
  CHECK_THROWS_AS(confidence_band(c, r), InadmissibleError);
  r.t1 = 0.5;
  r.t2 = 50.0;
  CHECK_THROWS_AS(confidence_band(c, r), InadmissibleError);
  r.t2 = 0.5;
  CHECK_THROWS_AS(confidence_band(c, r), std::invalid_argument);
  CHECK_THROWS_AS(pointwise_ci(c, 0.0, r), InadmissibleError);
}

TEST_CASE("one-sample containment test") {
  const Cohort c = demo_cohort();
  BandRequest r = small_request();
  const ZComponents z = prepare_components(c);
  const TestResult self = one_sample_ks(c, ReferenceCurve::step(z.f1), r);
  CHECK(self.statistic == 0.0);
  CHECK_FALSE(self.reject);
  const TestResult one = one_sample_ks(c, ReferenceCurve::continuous([](double) { return 1.0; }), r);
  CHECK(one.reject);
  const ConfidenceBand band = confidence_band(c, r);
  CHECK_FALSE(band_contains(band, ReferenceCurve::continuous([](double) { return 1.0; })));
  CHECK(band_contains(band, ReferenceCurve::step(z.f1)));
  // decision agrees with containment for the true curve
  const DGPSpec spec = surrogate_spec(300, 41);
  const auto truth = ReferenceCurve::continuous([spec](double t) { return true_cif(spec, Cause::Event1, t); });
  CHECK(one_sample_ks(c, truth, r).reject == !band_contains(band, truth));
}

TEST_CASE("p-values") {
  const std::vector<double> reps{1, 2, 3, 4};
  CHECK(resampling_p_value(reps, 2.5) == doctest::Approx(3.0 / 5));
  CHECK(resampling_p_value(reps, 10) == doctest::Approx(1.0 / 5));
  const TestResult r = make_test_result(5.0, reps, 0.05);
  CHECK(r.reject);
  CHECK(r.critical_value == 4.0);
}

TEST_CASE("weight functions") {
  StepFunction f;
  f.value_before_first = 1.0;
  f.times = {2.0, 3.0};
  f.values = {3.0, 2.0};
  const WeightFunction w = WeightFunction::step(f);
  CHECK(w(1.0) == 1.0);
  CHECK(w.sup_on(0.0, 2.0, false) == 1.0);
  CHECK(w.sup_on(0.0, 2.0, true) == 3.0);
  CHECK(w.inf_on(1.0, 4.0) == 1.0);
  CHECK(w.integral(1.0, 4.0) == doctest::Approx(1.0 + 3.0 + 2.0));
  CHECK(w.scaled(2.0)(2.5) == 6.0);
}

TEST_CASE("CvM and KS functionals of a constant path") {
  const std::vector<double> grid{0.5, 1.0, 2.0, 3.5};
  const std::vector<double> path(grid.size(), 0.3);
  const WeightFunction one = WeightFunction::constant(1.0);
  CHECK(cvm_functional(grid, path, 5.0, one) == doctest::Approx(0.09 * 4.5));
  CHECK(ks_functional(grid, path, 5.0, one) == doctest::Approx(0.3));
  // inserting non-event points leaves the step-function statistics unchanged
  const std::vector<double> fine{0.5, 0.7, 1.0, 1.5, 2.0, 3.5, 4.0};
  const std::vector<double> path2{0.1, 0.1, -0.4, -0.4, 0.2, 0.05, 0.05};
  const std::vector<double> coarse{0.5, 1.0, 2.0, 3.5};
  const std::vector<double> path2c{0.1, -0.4, 0.2, 0.05};
  CHECK(cvm_functional(fine, path2, 5.0, one) == doctest::Approx(cvm_functional(coarse, path2c, 5.0, one)));
  CHECK(ks_functional(fine, path2, 5.0, one) == doctest::Approx(ks_functional(coarse, path2c, 5.0, one)));
}

TEST_CASE("two-sample tests on identical cohorts") {
  const Cohort c = demo_cohort(200, 5);
  TwoSampleRequest r;
  r.replicates = 199;
  r.threads = 1;
  const TwoSampleResult res = two_sample_tests(c, c, r);
  CHECK(res.ks.statistic == 0.0);
  CHECK(res.cvm.statistic == 0.0);
  CHECK_FALSE(res.ks.reject);
  CHECK_FALSE(res.cvm.reject);
}

TEST_CASE("two-sample decisions are invariant to weight scaling") {
  const Cohort a = demo_cohort(200, 6);
  DGPSpec alt = surrogate_spec(200, 7);
  alt.hazard1 *= 1.4;
  const Cohort b = generate_cohort(alt);
  TwoSampleRequest r;
  r.replicates = 299;
  r.threads = 1;
  const TwoSampleResult base = two_sample_tests(a, b, r);
  r.weight = WeightFunction::constant(3.0);
  const TwoSampleResult scaled = two_sample_tests(a, b, r);
  CHECK(scaled.ks.statistic == doctest::Approx(3.0 * base.ks.statistic));
  CHECK(scaled.ks.critical_value == doctest::Approx(3.0 * base.ks.critical_value));
  CHECK(scaled.ks.reject == base.ks.reject);
  CHECK(scaled.cvm.statistic == doctest::Approx(3.0 * base.cvm.statistic));
  CHECK(scaled.cvm.reject == base.cvm.reject);
}

TEST_CASE("KS and CvM share replicate streams") {
  const Cohort a = demo_cohort(150, 8);
  const Cohort b = demo_cohort(150, 9);
  TwoSampleRequest r;
  r.replicates = 50;
  r.threads = 1;
  const TwoSampleResult res = two_sample_tests(a, b, r);
  const BootstrapPaths paths =
      two_sample_paths(prepare_components(a), prepare_components(b), r.scheme, 50, r.t1, r.t2, r.seed, r.adjust, 1);
  REQUIRE(paths.grid == res.grid);
  for (std::size_t k = 0; k < 50; ++k) {
    CHECK(res.ks.replicate_stats[k] == doctest::Approx(ks_functional(paths.grid, paths.path(k), r.t2, r.weight)));
    CHECK(res.cvm.replicate_stats[k] == doctest::Approx(cvm_functional(paths.grid, paths.path(k), r.t2, r.weight)));
  }
  CHECK(two_sample_ks(a, b, r).replicate_stats == res.ks.replicate_stats);
  CHECK(two_sample_cvm(a, b, r).replicate_stats == res.cvm.replicate_stats);
}
