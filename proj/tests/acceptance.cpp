#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "ddmb/error.hpp"
#include "ddmb/estimators.hpp"
#include "ddmb/inference.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/resampling.hpp"
#include "ddmb/simulation.hpp"
#include "support.hpp"

using namespace ddmb;
using ddmb::testing::make_cohort;
using ddmb::testing::random_cohort;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Fail;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

bool full_mode() {
  const char* mode = std::getenv("DDMB_ACCEPTANCE_MODE");
  return !(mode && std::string(mode) == "smoke");
}

// 1 ----------------------------------------------------------------------

Outcome estimator_oracles() {
  double drift = 0.0;
  auto track = [&](double got, double want) { drift = std::max(drift, std::abs(got - want)); };

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Cohort c = random_cohort(20 + 7 * seed, seed, false);
    const RiskTable rt = build_risk_table(c);
    const StepFunction f1 = aalen_johansen(rt, Cause::Event1);
    const StepFunction f2 = aalen_johansen(rt, Cause::Event2);
    const StepFunction km = kaplan_meier(rt);
    const double n = static_cast<double>(c.size());
    for (double t : rt.times) {
      double e1 = 0, e2 = 0, alive = 0;
      for (const auto& o : c.observations) {
        e1 += o.exit <= t && o.cause == Cause::Event1;
        e2 += o.exit <= t && o.cause == Cause::Event2;
        alive += o.exit > t;
      }
      track(f1(t), e1 / n);
      track(f2(t), e2 / n);
      track(km(t), alive / n);
    }
  }
  const RiskTable a = build_risk_table(make_cohort({1, 2, 3}, {1, 0, 1}));
  track(kaplan_meier(a)(1.0), 2.0 / 3);
  track(kaplan_meier(a)(3.0), 0.0);
  const RiskTable b = build_risk_table(make_cohort({1, 2, 3}, {1, 2, 0}));
  track(aalen_johansen(b, Cause::Event1)(1.0), 1.0 / 3);
  track(aalen_johansen(b, Cause::Event2)(2.0), 1.0 / 3);
  track(nelson_aalen(b, Cause::Event1)(1.0), 1.0 / 3);
  track(nelson_aalen(b, Cause::Event2)(2.0), 0.5);
  track(kaplan_meier(build_risk_table(make_cohort({1, 2, 3}, {1, 1, 1})))(2.0), 1.0 / 3);
  return verdict(drift <= 1e-12, fmt("max drift %.3g over 50 uncensored cohorts and hand examples", drift));
}

// 2 ----------------------------------------------------------------------

Outcome mass_conservation() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t n = 5 + (seed * 37) % 496;
    const RiskTable rt = build_risk_table(random_cohort(n, 1000 + seed, true, seed % 2 == 1));
    const StepFunction f1 = aalen_johansen(rt, Cause::Event1);
    const StepFunction f2 = aalen_johansen(rt, Cause::Event2);
    const StepFunction km = kaplan_meier(rt);
    for (double t : rt.times) worst = std::max(worst, std::abs(f1(t) + f2(t) + km(t) - 1.0));
  }
  return verdict(worst <= 1e-12, fmt("max |F1 + F2 + KM - 1| = %.3g over 100 cohorts", worst));
}

// 3 ----------------------------------------------------------------------

Outcome weird_moments() {
  const Cohort c = generate_cohort(surrogate_spec(200, 303));
  const ZComponents z = prepare_components(c);
  const WeightSampler sampler = z.sampler(MultiplierScheme::WeirdBinomial);
  bool closed_ok = true;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const SlotMoments m = slot_moments(MultiplierScheme::WeirdBinomial, z.at_risk[i]);
    const double y = static_cast<double>(z.at_risk[i]);
    closed_ok = closed_ok && m.mean == 0.0 && std::abs(m.variance - (1.0 - 1.0 / y)) <= 1e-15;
    closed_ok = closed_ok && sampler.variance(i) == m.variance;
  }
  const std::size_t draws = 100000;
  std::vector<double> sum(z.size(), 0.0), sum2(z.size(), 0.0), w(z.size());
  Stream rng = make_stream(31, {3});
  for (std::size_t d = 0; d < draws; ++d) {
    sampler.draw(rng, w);
    for (std::size_t i = 0; i < z.size(); ++i) {
      sum[i] += w[i];
      sum2[i] += w[i] * w[i];
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const SlotMoments m = slot_moments(MultiplierScheme::WeirdBinomial, z.at_risk[i]);
    if (m.variance == 0.0) {
      if (sum2[i] != 0.0) worst = INFINITY;
      continue;
    }
    const double mean = sum[i] / draws;
    const double second = sum2[i] / draws;  // estimates the variance since the mean is 0
    const double se_mean = std::sqrt(m.variance / draws);
    const double se_var = std::sqrt((m.fourth - m.variance * m.variance) / draws);
    worst = std::max({worst, std::abs(mean) / se_mean, std::abs(second - m.variance) / se_var});
  }
  return verdict(closed_ok && worst <= 4.0,
                 std::string(closed_ok ? "closed form exact" : "closed form MISMATCH") + ", " +
                     std::to_string(z.size()) + " slots x 1e5 draws, worst deviation " + fmt("%.2f", worst) +
                     " MC standard errors");
}

// 4 ----------------------------------------------------------------------

Outcome covariance_oracle() {
  const std::pair<double, double> points[] = {{1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 3}, {3, 4}};
  double worst_mc = 0.0, worst_zeta = 0.0;
  for (std::uint64_t seed : {401, 402, 403}) {
    const Cohort c = generate_cohort(surrogate_spec(300, seed));
    const ZComponents z = prepare_components(c);
    const RiskTable rt = build_risk_table(break_ties(c));
    for (auto scheme : {MultiplierScheme::StandardNormal, MultiplierScheme::WeirdBinomial}) {
      const std::size_t B = 10000;
      const BootstrapPaths paths = one_sample_paths(z, scheme, B, 1.0, 4.0, seed * 7);
      auto index_at = [&](double t) {
        return static_cast<std::size_t>(std::upper_bound(paths.grid.begin(), paths.grid.end(), t) -
                                        paths.grid.begin() - 1);
      };
      for (auto [s, t] : points) {
        const std::size_t i = index_at(s), j = index_at(t);
        double si = 0, sj = 0, sij = 0;
        for (std::size_t b = 0; b < B; ++b) {
          const auto p = paths.path(b);
          si += p[i];
          sj += p[j];
          sij += p[i] * p[j];
        }
        const double mc = sij / B - (si / B) * (sj / B);
        const double exact = bootstrap_covariance(z, scheme, s, t);
        worst_mc = std::max(worst_mc, std::abs(mc - exact) / std::abs(exact));
        const double zeta = zeta_plugin(rt, s, t);
        worst_zeta = std::max(worst_zeta, std::abs(zeta - exact) / std::abs(exact));
      }
    }
  }
  return verdict(worst_mc <= 0.05 && worst_zeta <= 0.10,
                 "3 cohorts n=300, normal+weird, 6 interior pairs: MC rel err " + fmt("%.4f", worst_mc) +
                     " (<= 0.05), plug-in rel err " + fmt("%.4f", worst_zeta) + " (<= 0.10)");
}

// 5 ----------------------------------------------------------------------

Outcome prefix_sums() {
  const ZComponents z = prepare_components(random_cohort(200, 505, true, true));
  const std::size_t B = 50;
  const BootstrapPaths one = one_sample_paths(z, MultiplierScheme::WeirdBinomial, B, 0.2, 4.0, 55, 1);
  const WeightSampler sampler = z.sampler(MultiplierScheme::WeirdBinomial);
  const double root_n = std::sqrt(200.0);
  double worst = 0.0;
  std::vector<double> w(z.size());
  for (std::size_t b = 0; b < B; ++b) {
    Stream rng = replicate_stream(55, b, 1);
    sampler.draw(rng, w);
    for (std::size_t g = 0; g < one.grid.size(); ++g) {
      double naive = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) naive += w[i] * z.value(i, one.grid[g]);
      worst = std::max(worst, std::abs(root_n * naive - one.path(b)[g]));
    }
  }
  bool same = true;
  for (std::size_t threads : {4, 8})
    same = same && one_sample_paths(z, MultiplierScheme::WeirdBinomial, B, 0.2, 4.0, 55, threads).values == one.values;
  return verdict(worst <= 1e-10 && same, "max |prefix - naive| = " + fmt("%.3g", worst) +
                                             (same ? ", identical at 1/4/8 threads" : ", THREAD MISMATCH"));
}

// 6 ----------------------------------------------------------------------

Outcome coverage() {
  CoverageConfig config;
  config.n_list = full_mode() ? std::vector<std::size_t>{50, 100, 300, 636} : std::vector<std::size_t>{100, 636};
  config.n_sim = 1000;
  config.replicates = 999;
  config.seed = 2024;
  const StudyReport report = coverage_study(config);
  bool large_ok = true, trend_ok = true;
  std::ostringstream detail;
  detail << (full_mode() ? "full grid" : "smoke grid") << "; coverage % by n";
  for (auto scheme : config.schemes)
    for (auto type : config.band_types) {
      detail << " | " << to_string(scheme) << "/" << to_string(type) << ":";
      double previous = -INFINITY;
      for (std::size_t n : config.n_list) {
        const double cov = report.cell(n, scheme, type).coverage;
        detail << " " << cov;
        if (cov < previous - 2.0) trend_ok = false;
        previous = cov;
      }
      const double large = report.cell(636, scheme, type).coverage;
      if (large < 92.5 || large > 96.5) large_ok = false;
    }
  detail << " | n=636 in [92.5,96.5]: " << (large_ok ? "yes" : "NO") << ", non-decreasing +-2: "
         << (trend_ok ? "yes" : "NO");
  return verdict(large_ok && trend_ok, detail.str());
}

// 7 ----------------------------------------------------------------------

Outcome calibration() {
  DGPSpec spec = surrogate_spec(50000, 707);
  const EventMix mix = observed_mix(generate_cohort(spec));
  const bool ok = std::abs(mix.event1 - kSurrogateMix.event1) <= 1.0 &&
                  std::abs(mix.event2 - kSurrogateMix.event2) <= 1.0 &&
                  std::abs(mix.censored - kSurrogateMix.censored) <= 1.0;
  return verdict(ok, "mix " + fmt("%.2f", mix.event1) + " / " + fmt("%.2f", mix.event2) + " / " +
                         fmt("%.2f", mix.censored) + " vs 38.68 / 20.06 / 41.26");
}

// 8 ----------------------------------------------------------------------

Outcome size_and_power() {
  SizePowerConfig size;
  size.null_spec = surrogate_spec(200, 1);
  size.n1 = size.n2 = 200;
  size.n_sim = 2000;
  size.replicates = 999;
  size.seed = 808;
  size.run_alternative = false;
  const RejectionRates null_rates = size_power_study(size).null_rates;

  SizePowerConfig power = size;
  power.n1 = power.n2 = 300;
  power.alt_spec = power.null_spec;
  power.alt_spec.hazard1 *= 2.0;
  power.n_sim = 1000;
  power.seed = 809;
  power.run_null = false;
  power.run_alternative = true;
  const RejectionRates alt_rates = size_power_study(power).alt_rates;

  const bool size_ok = null_rates.ks >= 3.5 && null_rates.ks <= 6.5 && null_rates.cvm >= 3.5 && null_rates.cvm <= 6.5;
  const bool power_ok = alt_rates.ks >= 80.0 && alt_rates.cvm >= 80.0;
  return verdict(size_ok && power_ok, "size (n=200/group, 2000 runs) KS " + fmt("%.2f", null_rates.ks) + "% CvM " +
                                          fmt("%.2f", null_rates.cvm) + "%; power (n=300/group, 1000 runs) KS " +
                                          fmt("%.1f", alt_rates.ks) + "% CvM " + fmt("%.1f", alt_rates.cvm) + "%");
}

// 9 ----------------------------------------------------------------------

std::string run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ddmb");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error("cli exited " + std::to_string(code) + ": " + err.str());
  return out.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ddmb_acceptance";
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  const std::string ref = (dir / "ref.csv").string();
  std::ofstream(a) << run_cli({"simulate", "cohort", "--n", "300", "--seed", "91"});
  std::ofstream(b) << run_cli({"simulate", "cohort", "--n", "250", "--seed", "92"});
  std::ofstream(ref) << "time,value\n0.5,0.05\n1,0.1\n2,0.2\n3,0.3\n4,0.35\n";

  const std::vector<std::vector<std::string>> commands{
      {"band", "-i", a, "--seed", "9"},
      {"band", "-i", a, "--seed", "9", "--scheme", "poisson", "--type", "hw", "--format", "json"},
      {"ci", "-i", a, "--at", "1", "2.5", "--seed", "9"},
      {"test1", "-i", a, "--reference", ref, "--seed", "9"},
      {"test2", "-i", a, "--input2", b, "--seed", "9", "--adjust", "risk"},
      {"simulate", "coverage", "--n-list", "100", "--nsim", "20", "--reps", "199", "--seed", "9"},
      {"simulate", "sizepower", "--n1", "100", "--n2", "100", "--nsim", "20", "--reps", "199", "--seed", "9"},
      {"simulate", "cohort", "--n", "100", "--seed", "9"},
  };
  std::size_t checked = 0;
  for (const auto& base : commands) {
    std::string reference;
    for (const char* threads : {"1", "4", "8"}) {
      for (int repeat = 0; repeat < 2; ++repeat) {
        auto args = base;
        args.insert(args.end(), {"--threads", threads});
        const std::string text = run_cli(args);
        if (reference.empty()) reference = text;
        if (text != reference) return verdict(false, "output differs for: " + base.front() + " " + base[1]);
        ++checked;
      }
    }
  }
  return verdict(true, std::to_string(commands.size()) + " stochastic commands, " + std::to_string(checked) +
                           " runs at 1/4/8 threads, byte-identical");
}

// 10 ---------------------------------------------------------------------

Outcome reference_areas() {
  const char* path = std::getenv("DDMB_CONTROL_CSV");
  if (!path || !*path) return {Verdict::Skip, "set DDMB_CONTROL_CSV to a control-group CSV (time,status) to run"};
  const Cohort cohort = ingest_csv(path);
  struct Cell {
    MultiplierScheme scheme;
    BandType type;
    double target;
  };
  const Cell cells[] = {
      {MultiplierScheme::StandardNormal, BandType::HallWellner, .4655},
      {MultiplierScheme::StandardNormal, BandType::EqualPrecision, .4621},
      {MultiplierScheme::CenteredPoisson1, BandType::HallWellner, .4783},
      {MultiplierScheme::CenteredPoisson1, BandType::EqualPrecision, .4770},
      {MultiplierScheme::WeirdBinomial, BandType::HallWellner, .4764},
      {MultiplierScheme::WeirdBinomial, BandType::EqualPrecision, .4746},
  };
  bool ok = true;
  std::ostringstream detail;
  detail << "areas:";
  for (const auto& cell : cells) {
    BandRequest r;
    r.scheme = cell.scheme;
    r.band_type = cell.type;
    const double area = confidence_band(cohort, r).area;
    detail << " " << to_string(cell.scheme) << "/" << to_string(cell.type) << " " << fmt("%.4f", area) << " (ref "
           << cell.target << ")";
    if (std::abs(area - cell.target) > 0.03) ok = false;
  }
  return verdict(ok, detail.str());
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exact estimator oracles", estimator_oracles},
      {2, "mass conservation", mass_conservation},
      {3, "weird-weight moment identities", weird_moments},
      {4, "bootstrap covariance oracle", covariance_oracle},
      {5, "prefix-sum path evaluation and thread invariance", prefix_sums},
      {6, "coverage study", coverage},
      {7, "event-mix calibration", calibration},
      {8, "two-sample size and power", size_and_power},
      {9, "determinism", determinism},
      {10, "reference band areas", reference_areas},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* label = outcome.verdict == Verdict::Pass ? "PASS" : outcome.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    if (outcome.verdict == Verdict::Fail) ++failures;
    std::cout << label << " criterion " << c.id << " (" << c.name << "): " << outcome.detail << " ["
              << fmt("%.1f", seconds) << "s]" << std::endl;
  }
  std::cout << (failures == 0 ? "acceptance: all evaluated criteria passed" : "acceptance: failures present")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
