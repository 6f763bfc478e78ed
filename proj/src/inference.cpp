#include "ddmb/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ddmb/error.hpp"

namespace ddmb {

std::string_view to_string(BandType type) {
  return type == BandType::HallWellner ? "hw" : "ep";
}

std::string_view to_string(Transform transform) {
  return transform == Transform::LogLog ? "loglog" : "identity";
}

BandType parse_band_type(std::string_view name) {
  if (name == "hw") return BandType::HallWellner;
  if (name == "ep") return BandType::EqualPrecision;
  throw std::invalid_argument("unknown band type '" + std::string(name) + "' (hw|ep)");
}

Transform parse_transform(std::string_view name) {
  if (name == "loglog") return Transform::LogLog;
  if (name == "identity") return Transform::Identity;
  throw std::invalid_argument("unknown transform '" + std::string(name) + "' (loglog|identity)");
}

double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("empirical_quantile: alpha must lie in (0, 1]");
  const double B = static_cast<double>(values.size());
  // tolerance keeps e.g. 0.95 * 1000 from rounding up to 951
  double rank = std::ceil((1.0 - alpha) * (B + 1.0) - 1e-9);
  rank = std::clamp(rank, 1.0, B);
  const auto k = static_cast<std::size_t>(rank) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

double band_weight(double f1, double sigma2, BandType type) {
  const double log_surv = std::log1p(-f1);
  return type == BandType::EqualPrecision ? log_surv / std::sqrt(sigma2) : log_surv / (1.0 + sigma2);
}

std::vector<double> gamma_factors(std::span<const double> f1, std::span<const double> sigma2, BandType type,
                                  Transform transform) {
  std::vector<double> out;
  out.reserve(f1.size());
  for (std::size_t g = 0; g < f1.size(); ++g) {
    const double f = f1[g];
    if (!(f > 0.0 && f < 1.0))
      throw InadmissibleError("transformation undefined on interval: F1_hat = " + std::to_string(f) +
                              " (shrink the interval)");
    if (type == BandType::EqualPrecision && !(sigma2[g] > 0.0))
      throw InadmissibleError("transformation undefined on interval: zero variance estimate (shrink the interval)");
    const double weight = band_weight(f, sigma2[g], type);
    const double slope = transform == Transform::LogLog ? 1.0 / ((1.0 - f) * -std::log1p(-f)) : 1.0;
    out.push_back(weight * slope);
  }
  return out;
}

BootstrapPaths gamma_paths(const BootstrapPaths& paths, const ZComponents& z, MultiplierScheme scheme, BandType type,
                           Transform transform) {
  std::vector<double> f1;
  f1.reserve(paths.grid.size());
  for (double g : paths.grid) f1.push_back(z.f1(g));
  const auto factors = gamma_factors(f1, sigma2_hat(z, scheme, paths.grid), type, transform);
  BootstrapPaths out = paths;
  for (std::size_t b = 0; b < out.replicates; ++b)
    for (std::size_t g = 0; g < out.grid.size(); ++g) out.values[b * out.grid.size() + g] *= factors[g];
  return out;
}

void fill_band(ConfidenceBand& band, double q) {
  const std::size_t size = band.grid.size();
  band.quantile_q = q;
  band.lower.assign(size, 0.0);
  band.upper.assign(size, 0.0);
  const double root_n = std::sqrt(static_cast<double>(band.n));
  for (std::size_t k = 0; k < size; ++k) {
    const double f = band.estimate[k];
    const double g = band_weight(f, band.sigma2[k], band.band_type);
    double a = f;
    double b = f;
    if (q > 0.0) {
      if (band.transform == Transform::LogLog) {
        const double e = q / (root_n * g);
        a = 1.0 - std::pow(1.0 - f, std::exp(e));
        b = 1.0 - std::pow(1.0 - f, std::exp(-e));
      } else {
        const double half = q / (root_n * std::abs(g));
        a = f - half;
        b = f + half;
      }
    }
    band.lower[k] = std::clamp(std::min(a, b), 0.0, 1.0);
    band.upper[k] = std::clamp(std::max(a, b), 0.0, 1.0);
  }
  band.area = band_area(band);
}

double band_area(const ConfidenceBand& band) {
  double area = 0.0;
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    const double end = k + 1 < band.grid.size() ? band.grid[k + 1] : band.t2;
    area += (band.upper[k] - band.lower[k]) * (end - band.grid[k]);
  }
  return area;
}

ReferenceCurve ReferenceCurve::continuous(std::function<double(double)> f) {
  ReferenceCurve c;
  c.value = f;
  c.left_limit = std::move(f);
  return c;
}

ReferenceCurve ReferenceCurve::step(const StepFunction& f) {
  ReferenceCurve c;
  c.value = [f](double t) { return f(t); };
  c.left_limit = [f](double t) { return f.left_limit(t); };
  c.jumps = f.times;
  return c;
}

namespace {

// Calls check(k, F) for each point of the reference to be compared with band
// piece k.
template <class Check>
void for_each_check_point(const ConfidenceBand& band, const ReferenceCurve& reference, Check&& check) {
  const std::size_t size = band.grid.size();
  for (std::size_t k = 0; k < size; ++k) {
    const double start = band.grid[k];
    const bool last = k + 1 == size;
    const double end = last ? band.t2 : band.grid[k + 1];
    check(k, reference.value(start));
    const auto first_jump = std::upper_bound(reference.jumps.begin(), reference.jumps.end(), start);
    for (auto it = first_jump; it != reference.jumps.end() && *it < end; ++it) check(k, reference.value(*it));
    if (end > start) check(k, last ? reference.value(end) : reference.left_limit(end));
  }
}

double phi(double x, Transform transform) {
  if (transform == Transform::Identity) return x;
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(-std::log1p(-x));
}

}  // namespace

double containment_statistic(const ConfidenceBand& band, const ReferenceCurve& reference) {
  const double root_n = std::sqrt(static_cast<double>(band.n));
  double stat = 0.0;
  for_each_check_point(band, reference, [&](std::size_t k, double value) {
    const double f = band.estimate[k];
    const double g = band_weight(f, band.sigma2[k], band.band_type);
    const double gap = std::abs(phi(f, band.transform) - phi(value, band.transform));
    stat = std::max(stat, root_n * std::abs(g) * gap);
  });
  return stat;
}

bool band_contains(const ConfidenceBand& band, const ReferenceCurve& reference) {
  bool inside = true;
  for_each_check_point(band, reference, [&](std::size_t k, double value) {
    if (value < band.lower[k] || value > band.upper[k]) inside = false;
  });
  return inside;
}

void check_band_interval(const ZComponents& z, double t1, double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("band interval requires t1 < t2");
  if (!(z.f1(t1) > 0.0))
    throw InadmissibleError("F1_hat(t1) = 0: no cause-1 event by t1 = " + std::to_string(t1) +
                            "; shrink the interval by moving t1 right");
  if (!(z.f1(t2) < 1.0))
    throw InadmissibleError("F1_hat(t2) = 1: transformation undefined; shrink the interval by moving t2 left");
  if (z.at_risk_at(t2) <= 0)
    throw InadmissibleError("nobody at risk at t2 = " + std::to_string(t2) + "; shrink the interval by moving t2 left");
}

std::vector<std::vector<double>> replicate_sups(const ZComponents& z, MultiplierScheme scheme,
                                                const std::vector<double>& grid,
                                                const std::vector<std::vector<double>>& factors, std::size_t B,
                                                std::uint64_t seed, std::size_t threads) {
  if (B < 1) throw std::invalid_argument("need at least one replicate");
  const PathEvaluator evaluator(z, grid);
  const WeightSampler sampler = z.sampler(scheme);
  const PathComponent component{&evaluator, &sampler, 1};
  std::vector<std::vector<double>> sups(factors.size(), std::vector<double>(B, 0.0));
  for_each_replicate({&component, 1}, std::sqrt(static_cast<double>(z.n)), B, seed, threads,
                     [&](std::size_t b, std::span<const double> path) {
                       for (std::size_t k = 0; k < factors.size(); ++k) {
                         double m = 0.0;
                         for (std::size_t g = 0; g < path.size(); ++g)
                           m = std::max(m, std::abs(factors[k][g] * path[g]));
                         sups[k][b] = m;
                       }
                     });
  return sups;
}

namespace {

ConfidenceBand band_on_grid(const ZComponents& z, const BandRequest& request, std::vector<double> grid, double t1,
                            double t2) {
  ConfidenceBand band;
  band.grid = std::move(grid);
  band.band_type = request.band_type;
  band.transform = request.transform;
  band.scheme = request.scheme;
  band.t1 = t1;
  band.t2 = t2;
  band.alpha = request.alpha;
  band.n = z.n;
  band.replicates = request.replicates;
  band.seed = request.seed;
  for (double g : band.grid) band.estimate.push_back(z.f1(g));
  band.sigma2 = sigma2_hat(z, request.scheme, band.grid);
  const auto factors = gamma_factors(band.estimate, band.sigma2, request.band_type, request.transform);
  const auto sups = replicate_sups(z, request.scheme, band.grid, {factors}, request.replicates, request.seed,
                                   request.threads);
  fill_band(band, empirical_quantile(sups.front(), request.alpha));
  return band;
}

}  // namespace

ConfidenceBand confidence_band(const ZComponents& z, const BandRequest& request) {
  check_band_interval(z, request.t1, request.t2);
  return band_on_grid(z, request, interval_grid(z, request.t1, request.t2), request.t1, request.t2);
}

ConfidenceBand confidence_band(const Cohort& cohort, const BandRequest& request) {
  return confidence_band(prepare_components(cohort), request);
}

ConfidenceBand pointwise_ci(const Cohort& cohort, double s, const BandRequest& request) {
  const ZComponents z = prepare_components(cohort);
  const double f = z.f1(s);
  if (!(f > 0.0 && f < 1.0))
    throw InadmissibleError("pointwise interval undefined: F1_hat(s) = " + std::to_string(f));
  return band_on_grid(z, request, interval_grid(z, s, s), s, s);
}

double resampling_p_value(std::span<const double> replicate_stats, double statistic) {
  const auto exceed = std::count_if(replicate_stats.begin(), replicate_stats.end(),
                                    [statistic](double v) { return v >= statistic; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(replicate_stats.size()) + 1.0);
}

TestResult make_test_result(double statistic, std::vector<double> replicate_stats, double alpha) {
  TestResult r;
  r.statistic = statistic;
  r.alpha = alpha;
  r.critical_value = empirical_quantile(replicate_stats, alpha);
  r.reject = statistic > r.critical_value;
  r.p_value = resampling_p_value(replicate_stats, statistic);
  r.replicate_stats = std::move(replicate_stats);
  return r;
}

TestResult one_sample_ks(const Cohort& cohort, const ReferenceCurve& reference, const BandRequest& request) {
  const ZComponents z = prepare_components(cohort);
  check_band_interval(z, request.t1, request.t2);
  ConfidenceBand band;
  band.grid = interval_grid(z, request.t1, request.t2);
  band.band_type = request.band_type;
  band.transform = request.transform;
  band.t1 = request.t1;
  band.t2 = request.t2;
  band.n = z.n;
  for (double g : band.grid) band.estimate.push_back(z.f1(g));
  band.sigma2 = sigma2_hat(z, request.scheme, band.grid);
  const auto factors = gamma_factors(band.estimate, band.sigma2, request.band_type, request.transform);
  auto sups =
      replicate_sups(z, request.scheme, band.grid, {factors}, request.replicates, request.seed, request.threads);
  return make_test_result(containment_statistic(band, reference), std::move(sups.front()), request.alpha);
}

WeightFunction WeightFunction::constant(double c) {
  WeightFunction w;
  w.f_.value_before_first = c;
  return w;
}

WeightFunction WeightFunction::step(StepFunction f) {
  WeightFunction w;
  w.f_ = std::move(f);
  return w;
}

double WeightFunction::operator()(double t) const { return f_(t); }

double WeightFunction::sup_on(double a, double b, bool closed_right) const {
  double s = f_(a);
  for (auto it = std::upper_bound(f_.times.begin(), f_.times.end(), a); it != f_.times.end(); ++it) {
    if (*it > b || (*it == b && !closed_right)) break;
    s = std::max(s, f_(*it));
  }
  return s;
}

double WeightFunction::inf_on(double a, double b) const {
  double s = f_(a);
  for (auto it = std::upper_bound(f_.times.begin(), f_.times.end(), a); it != f_.times.end() && *it <= b; ++it)
    s = std::min(s, f_(*it));
  return s;
}

double WeightFunction::integral(double a, double b) const {
  double total = 0.0;
  double left = a;
  for (auto it = std::upper_bound(f_.times.begin(), f_.times.end(), a); it != f_.times.end() && *it < b; ++it) {
    total += f_(left) * (*it - left);
    left = *it;
  }
  return total + f_(left) * (b - left);
}

WeightFunction WeightFunction::scaled(double c) const {
  WeightFunction w = *this;
  w.f_.value_before_first *= c;
  for (auto& v : w.f_.values) v *= c;
  return w;
}

double ks_functional(std::span<const double> grid, std::span<const double> path, double t2, const WeightFunction& w) {
  double stat = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const bool last = k + 1 == grid.size();
    const double end = last ? t2 : grid[k + 1];
    stat = std::max(stat, std::abs(path[k]) * w.sup_on(grid[k], end, last));
  }
  return stat;
}

double cvm_functional(std::span<const double> grid, std::span<const double> path, double t2,
                      const WeightFunction& w) {
  double stat = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double end = k + 1 < grid.size() ? grid[k + 1] : t2;
    stat += path[k] * path[k] * w.integral(grid[k], end);
  }
  return stat;
}

TwoSampleResult two_sample_tests(const ZComponents& z1, const ZComponents& z2, const TwoSampleRequest& request) {
  if (!(request.weight.inf_on(request.t1, request.t2) > 0.0))
    throw std::invalid_argument("two-sample weight function must be positive on the interval");
  if (request.replicates < 1) throw std::invalid_argument("need at least one replicate");
  interval_grid(z1, request.t1, request.t2);
  interval_grid(z2, request.t1, request.t2);
  const ZComponents* groups[] = {&z1, &z2};
  TwoSampleResult result;
  result.grid = interval_grid(groups, request.t1, request.t2);
  const double n1 = static_cast<double>(z1.n);
  const double n2 = static_cast<double>(z2.n);
  const double root = std::sqrt(n1 * n2 / (n1 + n2));
  for (double g : result.grid) result.difference.push_back(root * (z1.f1(g) - z2.f1(g)));

  const double factor = adjustment_factor(request.adjust, z1, z2, request.t2);
  const PathEvaluator e1(z1, result.grid);
  const PathEvaluator e2(z2, result.grid);
  const WeightSampler s1 = z1.sampler(request.scheme);
  const WeightSampler s2 = z2.sampler(request.scheme);
  const PathComponent components[] = {{&e1, &s1, 1}, {&e2, &s2, 2}};
  std::vector<double> ks(request.replicates);
  std::vector<double> cvm(request.replicates);
  for_each_replicate(components, root * factor, request.replicates, request.seed, request.threads,
                     [&](std::size_t b, std::span<const double> path) {
                       ks[b] = ks_functional(result.grid, path, request.t2, request.weight);
                       cvm[b] = cvm_functional(result.grid, path, request.t2, request.weight);
                     });
  result.ks = make_test_result(ks_functional(result.grid, result.difference, request.t2, request.weight),
                               std::move(ks), request.alpha);
  result.cvm = make_test_result(cvm_functional(result.grid, result.difference, request.t2, request.weight),
                                std::move(cvm), request.alpha);
  result.ks.adjustment = factor;
  result.cvm.adjustment = factor;
  return result;
}

TwoSampleResult two_sample_tests(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request) {
  return two_sample_tests(prepare_components(cohort1), prepare_components(cohort2), request);
}

TestResult two_sample_ks(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request) {
  return two_sample_tests(cohort1, cohort2, request).ks;
}

TestResult two_sample_cvm(const Cohort& cohort1, const Cohort& cohort2, const TwoSampleRequest& request) {
  return two_sample_tests(cohort1, cohort2, request).cvm;
}

}  // namespace ddmb
