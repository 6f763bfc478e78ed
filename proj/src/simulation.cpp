#include "ddmb/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ddmb/error.hpp"
#include "ddmb/parallel.hpp"
#include "ddmb/resampling.hpp"

namespace ddmb {

namespace {

// stream coordinates
constexpr std::uint64_t kCohortTag = 0xC0;
constexpr std::uint64_t kBootTag = 0xB0;
constexpr std::uint64_t kGroup1Tag = 0x61;
constexpr std::uint64_t kGroup2NullTag = 0x62;
constexpr std::uint64_t kGroup2AltTag = 0x63;

double exponential(Stream& rng, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-rng.uniform()) / rate;
}

std::uint64_t scheme_code(MultiplierScheme s) { return static_cast<std::uint64_t>(s) + 1; }

}  // namespace

void validate(const DGPSpec& spec) {
  if (spec.hazard1 < 0.0 || spec.hazard2 < 0.0 || spec.censor_rate < 0.0)
    throw std::invalid_argument("DGP rates must be non-negative");
  if (!(spec.hazard1 + spec.hazard2 > 0.0)) throw std::invalid_argument("DGP needs a positive event hazard");
  if (!(spec.admin_end > 0.0)) throw std::invalid_argument("administrative end must be positive");
}

EventMix expected_mix(const DGPSpec& spec) {
  validate(spec);
  const double total = spec.hazard1 + spec.hazard2 + spec.censor_rate;
  const double reached = std::isinf(spec.admin_end) ? 0.0 : std::exp(-total * spec.admin_end);
  const double decided = 1.0 - reached;
  return {100.0 * spec.hazard1 / total * decided, 100.0 * spec.hazard2 / total * decided,
          100.0 * (spec.censor_rate / total * decided + reached)};
}

EventMix observed_mix(const Cohort& cohort) {
  const double n = static_cast<double>(cohort.size());
  return {100.0 * static_cast<double>(cohort.count(Cause::Event1)) / n,
          100.0 * static_cast<double>(cohort.count(Cause::Event2)) / n,
          100.0 * static_cast<double>(cohort.count(Cause::Censored)) / n};
}

double true_cif(const DGPSpec& spec, Cause cause, double t) {
  const double total = spec.hazard1 + spec.hazard2;
  const double rate = cause == Cause::Event1 ? spec.hazard1 : spec.hazard2;
  if (t <= 0.0) return 0.0;
  return rate / total * -std::expm1(-total * t);
}

DGPSpec calibrate_rates(const EventMix& target, double admin_end, double at_risk_at_end) {
  const double sum = target.event1 + target.event2 + target.censored;
  if (target.event1 < 0.0 || target.event2 < 0.0 || target.censored < 0.0 || std::abs(sum - 100.0) > 0.05)
    throw std::invalid_argument("target mix must be non-negative and sum to 100");
  if (!(target.event1 > 0.0)) throw std::invalid_argument("infeasible target: cause-1 share must be positive");
  DGPSpec spec;
  spec.admin_end = admin_end;
  const double p1 = target.event1 / sum;
  const double p2 = target.event2 / sum;
  const double pc = target.censored / sum;
  double total = 1.0;
  double reached = 0.0;
  if (!std::isinf(admin_end)) {
    if (!(at_risk_at_end > 0.0 && at_risk_at_end < 1.0))
      throw std::invalid_argument("at-risk share at the administrative end must lie in (0, 1)");
    if (pc < at_risk_at_end)
      throw std::invalid_argument("infeasible target: censored share below the share reaching the administrative end");
    total = -std::log(at_risk_at_end) / admin_end;
    reached = at_risk_at_end;
  }
  const double decided = 1.0 - reached;
  spec.hazard1 = total * p1 / decided;
  spec.hazard2 = total * p2 / decided;
  spec.censor_rate = total * (pc - reached) / decided;
  if (spec.censor_rate < 0.0) spec.censor_rate = 0.0;
  return spec;
}

DGPSpec surrogate_spec(std::size_t n, std::uint64_t seed) {
  DGPSpec spec = calibrate_rates(kSurrogateMix, 5.0, kAtRiskAtEnd);
  spec.n = n;
  spec.seed = seed;
  return spec;
}

Cohort generate_cohort(const DGPSpec& spec) {
  validate(spec);
  Stream rng = make_stream(spec.seed, {kCohortTag});
  const double event_rate = spec.hazard1 + spec.hazard2;
  const double share1 = spec.hazard1 / event_rate;
  Cohort cohort;
  cohort.observations.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double event_time = exponential(rng, event_rate);
    const Cause cause = rng.uniform() < share1 ? Cause::Event1 : Cause::Event2;
    const double censor_time = std::min(exponential(rng, spec.censor_rate), spec.admin_end);
    Observation obs;
    obs.id = std::to_string(i + 1);
    if (event_time <= censor_time) {
      obs.exit = event_time;
      obs.cause = cause;
    } else {
      obs.exit = censor_time;
      obs.cause = Cause::Censored;
    }
    cohort.observations.push_back(std::move(obs));
  }
  return break_ties(cohort);
}

const CoverageCell& StudyReport::cell(std::size_t n, MultiplierScheme scheme, BandType type) const {
  for (const auto& c : cells)
    if (c.n == n && c.scheme == scheme && c.band_type == type) return c;
  throw std::out_of_range("no such coverage cell");
}

StudyReport coverage_study(const CoverageConfig& config) {
  validate(config.spec);
  if (config.n_sim == 0) throw std::invalid_argument("coverage study needs at least one run");
  StudyReport report;
  report.config = config;
  const std::size_t n_schemes = config.schemes.size();
  const std::size_t n_types = config.band_types.size();
  const auto truth = ReferenceCurve::continuous(
      [spec = config.spec](double t) { return true_cif(spec, Cause::Event1, t); });

  std::size_t counts[3] = {0, 0, 0};
  std::size_t total_subjects = 0;
  for (std::size_t n : config.n_list) {
    // per run: covered flag (-1 inadmissible) and area for every (scheme, type)
    std::vector<int> covered(config.n_sim * n_schemes * n_types, 0);
    std::vector<double> areas(covered.size(), 0.0);
    std::vector<std::array<std::size_t, 3>> run_counts(config.n_sim);
    parallel_for_chunks(config.n_sim, config.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        DGPSpec spec = config.spec;
        spec.n = n;
        spec.seed = derive_key({config.seed, kCohortTag, n, r});
        const Cohort cohort = generate_cohort(spec);
        run_counts[r] = {cohort.count(Cause::Event1), cohort.count(Cause::Event2), cohort.count(Cause::Censored)};
        const ZComponents z = prepare_components(cohort);
        for (std::size_t s = 0; s < n_schemes; ++s) {
          const MultiplierScheme scheme = config.schemes[s];
          const std::size_t base = (r * n_schemes + s) * n_types;
          try {
            check_band_interval(z, config.t1, config.t2);
            ConfidenceBand band;
            band.grid = interval_grid(z, config.t1, config.t2);
            band.t1 = config.t1;
            band.t2 = config.t2;
            band.n = z.n;
            band.transform = config.transform;
            band.alpha = config.alpha;
            for (double g : band.grid) band.estimate.push_back(z.f1(g));
            band.sigma2 = sigma2_hat(z, scheme, band.grid);
            std::vector<std::vector<double>> factors;
            for (BandType type : config.band_types)
              factors.push_back(gamma_factors(band.estimate, band.sigma2, type, config.transform));
            const auto sups = replicate_sups(z, scheme, band.grid, factors, config.replicates,
                                             derive_key({config.seed, kBootTag, n, r, scheme_code(scheme)}), 1);
            for (std::size_t k = 0; k < n_types; ++k) {
              band.band_type = config.band_types[k];
              fill_band(band, empirical_quantile(sups[k], config.alpha));
              covered[base + k] = band_contains(band, truth) ? 1 : 0;
              areas[base + k] = band.area;
            }
          } catch (const InadmissibleError&) {
            for (std::size_t k = 0; k < n_types; ++k) covered[base + k] = -1;
          }
        }
      }
    });
    for (const auto& rc : run_counts) {
      for (int j = 0; j < 3; ++j) counts[j] += rc[static_cast<std::size_t>(j)];
      total_subjects += rc[0] + rc[1] + rc[2];
    }
    for (std::size_t s = 0; s < n_schemes; ++s)
      for (std::size_t k = 0; k < n_types; ++k) {
        CoverageCell cell;
        cell.n = n;
        cell.scheme = config.schemes[s];
        cell.band_type = config.band_types[k];
        cell.runs = config.n_sim;
        double area_sum = 0.0;
        for (std::size_t r = 0; r < config.n_sim; ++r) {
          const std::size_t idx = (r * n_schemes + s) * n_types + k;
          if (covered[idx] < 0) {
            ++cell.inadmissible;
            continue;
          }
          cell.covered += static_cast<std::size_t>(covered[idx]);
          area_sum += areas[idx];
        }
        cell.coverage = 100.0 * static_cast<double>(cell.covered) / static_cast<double>(cell.runs);
        const std::size_t admissible = cell.runs - cell.inadmissible;
        cell.mean_area = admissible > 0 ? area_sum / static_cast<double>(admissible) : 0.0;
        report.cells.push_back(cell);
      }
  }
  if (total_subjects > 0) {
    const double total = static_cast<double>(total_subjects);
    report.mix = {100.0 * static_cast<double>(counts[0]) / total, 100.0 * static_cast<double>(counts[1]) / total,
                  100.0 * static_cast<double>(counts[2]) / total};
  }
  return report;
}

namespace {

RejectionRates run_two_sample(const SizePowerConfig& config, std::uint64_t group2_tag, const DGPSpec& group2) {
  RejectionRates rates;
  rates.runs = config.n_sim;
  std::vector<int> ks(config.n_sim, 0);
  std::vector<int> cvm(config.n_sim, 0);
  parallel_for_chunks(config.n_sim, config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      DGPSpec spec1 = config.null_spec;
      spec1.n = config.n1;
      spec1.seed = derive_key({config.seed, kGroup1Tag, r});
      DGPSpec spec2 = group2;
      spec2.n = config.n2;
      spec2.seed = derive_key({config.seed, group2_tag, r});
      TwoSampleRequest request;
      request.t1 = config.t1;
      request.t2 = config.t2;
      request.scheme = config.scheme;
      request.replicates = config.replicates;
      request.alpha = config.alpha;
      request.adjust = config.adjust;
      request.seed = derive_key({config.seed, kBootTag, r});
      request.threads = 1;
      try {
        const auto result =
            two_sample_tests(prepare_components(generate_cohort(spec1)), prepare_components(generate_cohort(spec2)), request);
        ks[r] = result.ks.reject ? 1 : 0;
        cvm[r] = result.cvm.reject ? 1 : 0;
      } catch (const InadmissibleError&) {
        ks[r] = -1;
        cvm[r] = -1;
      }
    }
  });
  for (std::size_t r = 0; r < config.n_sim; ++r) {
    if (ks[r] < 0) {
      ++rates.inadmissible;
      continue;
    }
    rates.ks_rejections += static_cast<std::size_t>(ks[r]);
    rates.cvm_rejections += static_cast<std::size_t>(cvm[r]);
  }
  rates.ks = 100.0 * static_cast<double>(rates.ks_rejections) / static_cast<double>(rates.runs);
  rates.cvm = 100.0 * static_cast<double>(rates.cvm_rejections) / static_cast<double>(rates.runs);
  return rates;
}

}  // namespace

SizePowerReport size_power_study(const SizePowerConfig& config) {
  validate(config.null_spec);
  validate(config.alt_spec);
  if (config.n_sim == 0) throw std::invalid_argument("size/power study needs at least one run");
  SizePowerReport report;
  report.config = config;
  if (config.run_null) report.null_rates = run_two_sample(config, kGroup2NullTag, config.null_spec);
  if (config.run_alternative) report.alt_rates = run_two_sample(config, kGroup2AltTag, config.alt_spec);
  return report;
}

}  // namespace ddmb
