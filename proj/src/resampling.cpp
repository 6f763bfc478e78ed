#include "ddmb/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ddmb/error.hpp"
#include "ddmb/parallel.hpp"

namespace ddmb {

double ZComponents::value(std::size_t slot, double s) const {
  if (jump_time[slot] > s) return 0.0;
  return coef_const[slot] + coef_f1[slot] * f1(s);
}

std::int64_t ZComponents::at_risk_at(double t) const {
  const auto entered = std::lower_bound(sorted_entries.begin(), sorted_entries.end(), t) - sorted_entries.begin();
  const auto left = std::lower_bound(sorted_exits.begin(), sorted_exits.end(), t) - sorted_exits.begin();
  return static_cast<std::int64_t>(entered - left);
}

ZComponents precompute_z(const RiskTable& rt) {
  ZComponents z;
  z.n = rt.n_subjects;
  z.f1 = aalen_johansen(rt, Cause::Event1);
  const StepFunction f2 = aalen_johansen(rt, Cause::Event2);
  z.sorted_entries = rt.sorted_entries;
  z.sorted_exits = rt.sorted_exits;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    if (!rt.is_event(k) || rt.at_risk[k] <= 0) continue;
    const double y = static_cast<double>(rt.at_risk[k]);
    const double f1_before = k == 0 ? 0.0 : z.f1.values[k - 1];
    const double f2_before = k == 0 ? 0.0 : f2.values[k - 1];
    z.jump_time.push_back(rt.times[k]);
    z.subject.push_back(rt.subject[k]);
    z.at_risk.push_back(rt.at_risk[k]);
    z.coef_f1.push_back(-1.0 / y);
    if (rt.dN1[k]) {
      z.cause.push_back(Cause::Event1);
      z.coef_const.push_back((1.0 - f2_before) / y);
    } else {
      z.cause.push_back(Cause::Event2);
      z.coef_const.push_back(f1_before / y);
    }
  }
  return z;
}

ZComponents prepare_components(const Cohort& cohort) {
  return precompute_z(build_risk_table(break_ties(cohort)));
}

std::vector<double> interval_grid(std::span<const ZComponents* const> groups, double t1, double t2) {
  if (!(t1 <= t2)) throw std::invalid_argument("interval requires t1 <= t2");
  std::vector<double> grid{t1};
  bool any_event = false;
  for (const ZComponents* z : groups) {
    for (double t : z->jump_time) {
      if (t1 < t && t <= t2) grid.push_back(t);
      if ((t1 == t2 && t <= t1) || (t1 <= t && t <= t2)) any_event = true;
    }
  }
  if (!any_event) throw InadmissibleError("no events in interval");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> interval_grid(const ZComponents& z, double t1, double t2) {
  const ZComponents* groups[] = {&z};
  return interval_grid(groups, t1, t2);
}

PathEvaluator::PathEvaluator(const ZComponents& z, std::vector<double> grid) : z_(&z), grid_(std::move(grid)) {
  if (!std::is_sorted(grid_.begin(), grid_.end())) throw std::invalid_argument("PathEvaluator: grid must be sorted");
  f1_at_grid_.reserve(grid_.size());
  slots_through_.reserve(grid_.size());
  for (double g : grid_) {
    f1_at_grid_.push_back(z.f1(g));
    slots_through_.push_back(
        static_cast<std::size_t>(std::upper_bound(z.jump_time.begin(), z.jump_time.end(), g) - z.jump_time.begin()));
  }
}

void PathEvaluator::accumulate(std::span<const double> weights, double scale, std::span<double> out) const {
  const ZComponents& z = *z_;
  std::size_t i = 0;
  double a = 0.0;
  double c = 0.0;
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    for (const std::size_t end = slots_through_[g]; i < end; ++i) {
      a += weights[i] * z.coef_const[i];
      c += weights[i] * z.coef_f1[i];
    }
    out[g] += scale * (a + f1_at_grid_[g] * c);
  }
}

std::string_view to_string(Adjustment adjust) {
  switch (adjust) {
    case Adjustment::None: return "none";
    case Adjustment::Count: return "count";
    case Adjustment::Risk: return "risk";
  }
  return "unknown";
}

Adjustment parse_adjustment(std::string_view name) {
  if (name == "none") return Adjustment::None;
  if (name == "count") return Adjustment::Count;
  if (name == "risk") return Adjustment::Risk;
  throw std::invalid_argument("unknown adjustment '" + std::string(name) + "' (none|count|risk)");
}

double adjustment_factor(Adjustment adjust, const ZComponents& z1, const ZComponents& z2, double t2) {
  switch (adjust) {
    case Adjustment::None: return 1.0;
    case Adjustment::Count: {
      const double n1 = static_cast<double>(z1.n);
      const double n2 = static_cast<double>(z2.n);
      return 1.0 + std::abs(n1 - n2) / (n1 * n2);
    }
    case Adjustment::Risk: {
      const double y1 = static_cast<double>(z1.at_risk_at(t2));
      const double y2 = static_cast<double>(z2.at_risk_at(t2));
      if (y1 <= 0.0 || y2 <= 0.0) throw InadmissibleError("risk adjustment needs subjects at risk at t2 in both groups");
      return 1.0 + std::abs(y1 - y2) / (y1 * y2);
    }
  }
  return 1.0;
}

Stream replicate_stream(std::uint64_t seed, std::size_t replicate, std::uint64_t tag) {
  return make_stream(seed, {static_cast<std::uint64_t>(replicate), tag});
}

void for_each_replicate(std::span<const PathComponent> components, double scale, std::size_t B, std::uint64_t seed,
                        std::size_t threads,
                        const std::function<void(std::size_t, std::span<const double>)>& visit) {
  if (components.empty()) throw std::invalid_argument("for_each_replicate: no components");
  const std::size_t grid_size = components.front().evaluator->grid().size();
  for (const auto& c : components) {
    if (c.evaluator->grid() != components.front().evaluator->grid())
      throw std::invalid_argument("for_each_replicate: components must share one grid");
    if (c.sampler->size() != c.evaluator->components().size())
      throw std::invalid_argument("for_each_replicate: sampler does not match components");
  }
  parallel_for_chunks(B, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> path(grid_size);
    std::vector<std::vector<double>> weights;
    for (const auto& c : components) weights.emplace_back(c.sampler->size());
    for (std::size_t b = begin; b < end; ++b) {
      std::fill(path.begin(), path.end(), 0.0);
      for (std::size_t k = 0; k < components.size(); ++k) {
        Stream rng = replicate_stream(seed, b, components[k].stream_tag);
        components[k].sampler->draw(rng, weights[k]);
        components[k].evaluator->accumulate(weights[k], scale, path);
      }
      visit(b, path);
    }
  });
}

namespace {

BootstrapPaths materialize(std::span<const PathComponent> components, double scale, std::size_t B,
                           std::uint64_t seed, std::size_t threads) {
  if (B < 1) throw std::invalid_argument("need at least one replicate");
  BootstrapPaths out;
  out.grid = components.front().evaluator->grid();
  out.replicates = B;
  out.scale = scale;
  out.values.assign(B * out.grid.size(), 0.0);
  out.stream_keys.resize(B);
  for (std::size_t b = 0; b < B; ++b)
    out.stream_keys[b] = replicate_stream(seed, b, components.front().stream_tag).key();
  for_each_replicate(components, scale, B, seed, threads, [&](std::size_t b, std::span<const double> path) {
    std::copy(path.begin(), path.end(), out.values.begin() + static_cast<std::ptrdiff_t>(b * out.grid.size()));
  });
  return out;
}

}  // namespace

BootstrapPaths one_sample_paths(const ZComponents& z, MultiplierScheme scheme, std::size_t B, double t1, double t2,
                                std::uint64_t seed, std::size_t threads) {
  const PathEvaluator evaluator(z, interval_grid(z, t1, t2));
  const WeightSampler sampler = z.sampler(scheme);
  const PathComponent component{&evaluator, &sampler, 1};
  return materialize({&component, 1}, std::sqrt(static_cast<double>(z.n)), B, seed, threads);
}

BootstrapPaths two_sample_paths(const ZComponents& z1, const ZComponents& z2, MultiplierScheme scheme, std::size_t B,
                                double t1, double t2, std::uint64_t seed, Adjustment adjust, std::size_t threads) {
  // each group must have events in the interval on its own
  interval_grid(z1, t1, t2);
  interval_grid(z2, t1, t2);
  const ZComponents* groups[] = {&z1, &z2};
  const auto grid = interval_grid(groups, t1, t2);
  const PathEvaluator e1(z1, grid);
  const PathEvaluator e2(z2, grid);
  const WeightSampler s1 = z1.sampler(scheme);
  const WeightSampler s2 = z2.sampler(scheme);
  const PathComponent components[] = {{&e1, &s1, 1}, {&e2, &s2, 2}};
  const double n1 = static_cast<double>(z1.n);
  const double n2 = static_cast<double>(z2.n);
  const double scale = std::sqrt(n1 * n2 / (n1 + n2)) * adjustment_factor(adjust, z1, z2, t2);
  return materialize(components, scale, B, seed, threads);
}

double bootstrap_covariance(const ZComponents& z, MultiplierScheme scheme, double s, double t) {
  const double lo = std::min(s, t);
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size() && z.jump_time[i] <= lo; ++i)
    sum += slot_moments(scheme, z.at_risk[i]).variance * z.value(i, s) * z.value(i, t);
  return static_cast<double>(z.n) * sum;
}

std::vector<double> bootstrap_variance(const ZComponents& z, MultiplierScheme scheme, std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("bootstrap_variance: grid must be sorted");
  // sum sigma^2 (c + d F)^2 = P2 + 2 F P1 + F^2 P0 over slots with T <= g
  std::vector<double> out;
  out.reserve(grid.size());
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::size_t i = 0;
  for (double g : grid) {
    for (; i < z.size() && z.jump_time[i] <= g; ++i) {
      const double v = slot_moments(scheme, z.at_risk[i]).variance;
      p0 += v * z.coef_f1[i] * z.coef_f1[i];
      p1 += v * z.coef_const[i] * z.coef_f1[i];
      p2 += v * z.coef_const[i] * z.coef_const[i];
    }
    const double f = z.f1(g);
    out.push_back(static_cast<double>(z.n) * std::max(0.0, p2 + 2.0 * f * p1 + f * f * p0));
  }
  return out;
}

std::vector<double> sigma2_hat(const ZComponents& z, MultiplierScheme scheme, std::span<const double> grid) {
  auto out = bootstrap_variance(z, scheme, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double survival = 1.0 - z.f1(grid[g]);
    if (!(survival > 0.0)) throw InadmissibleError("transformation undefined: F1_hat(t) = 1");
    out[g] /= survival * survival;
  }
  return out;
}

double sigma2_hat(const ZComponents& z, MultiplierScheme scheme, double t) {
  const double grid[] = {t};
  return sigma2_hat(z, scheme, grid).front();
}

}  // namespace ddmb
