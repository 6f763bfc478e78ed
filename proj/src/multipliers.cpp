#include "ddmb/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ddmb {

std::string_view to_string(MultiplierScheme scheme) {
  switch (scheme) {
    case MultiplierScheme::StandardNormal: return "normal";
    case MultiplierScheme::CenteredPoisson1: return "poisson";
    case MultiplierScheme::WeirdBinomial: return "weird";
  }
  return "unknown";
}

MultiplierScheme parse_scheme(std::string_view name) {
  if (name == "normal") return MultiplierScheme::StandardNormal;
  if (name == "poisson") return MultiplierScheme::CenteredPoisson1;
  if (name == "weird") return MultiplierScheme::WeirdBinomial;
  throw std::invalid_argument("unknown multiplier scheme '" + std::string(name) + "' (normal|poisson|weird)");
}

std::int64_t sample_weird_binomial(Stream& rng, std::int64_t trials, double p0) {
  if (trials <= 1) return trials;
  const double u = rng.uniform();
  const double odds = 1.0 / static_cast<double>(trials - 1);  // p / (1 - p)
  double p = p0;
  double cdf = p0;
  std::int64_t k = 0;
  while (u >= cdf && k < trials) {
    p *= static_cast<double>(trials - k) / static_cast<double>(k + 1) * odds;
    ++k;
    cdf += p;
  }
  return k;
}

namespace {

std::int64_t sample_poisson1(Stream& rng) {
  const double u = rng.uniform();
  double p = std::exp(-1.0);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf && k < 64) {
    ++k;
    p /= static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

WeightSampler::WeightSampler(MultiplierScheme scheme, std::vector<std::int64_t> at_risk)
    : scheme_(scheme), at_risk_(std::move(at_risk)) {
  if (scheme_ == MultiplierScheme::WeirdBinomial) {
    p0_.reserve(at_risk_.size());
    for (auto y : at_risk_) {
      if (y < 1) throw std::invalid_argument("weird weights need Y >= 1 at every event");
      const double yd = static_cast<double>(y);
      p0_.push_back(y == 1 ? 0.0 : std::exp(yd * std::log1p(-1.0 / yd)));
    }
  }
}

double WeightSampler::variance(std::size_t slot) const { return slot_moments(scheme_, at_risk_[slot]).variance; }

void WeightSampler::draw(Stream& rng, std::span<double> out) const {
  if (out.size() != at_risk_.size()) throw std::invalid_argument("WeightSampler::draw: size mismatch");
  switch (scheme_) {
    case MultiplierScheme::StandardNormal: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& w : out) w = normal(rng);
      break;
    }
    case MultiplierScheme::CenteredPoisson1:
      for (auto& w : out) w = static_cast<double>(sample_poisson1(rng) - 1);
      break;
    case MultiplierScheme::WeirdBinomial:
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<double>(sample_weird_binomial(rng, at_risk_[i], p0_[i]) - 1);
      break;
  }
}

SlotMoments slot_moments(MultiplierScheme scheme, std::int64_t at_risk) {
  switch (scheme) {
    case MultiplierScheme::StandardNormal: return {true, 0.0, 1.0, 3.0};
    // central moments of Poisson(1): variance 1, fourth 1 + 3 = 4
    case MultiplierScheme::CenteredPoisson1: return {true, 0.0, 1.0, 4.0};
    case MultiplierScheme::WeirdBinomial: {
      const double m = static_cast<double>(at_risk);
      const double p = 1.0 / m;
      const double pq = p * (1.0 - p);
      // Binomial(m, p) has mean mp = 1, so B - 1 is exactly centered
      return {true, 0.0, m * pq, m * pq * (1.0 + 3.0 * (m - 2.0) * pq)};
    }
  }
  return {};
}

namespace {

struct ActiveSlot {
  std::size_t slot;
  std::int64_t at_risk;
};

std::vector<ActiveSlot> active_slots(const RiskTable& rt, const Cohort& cohort) {
  if (rt.n_subjects != cohort.size()) throw std::invalid_argument("risk table does not match cohort");
  std::vector<ActiveSlot> slots;
  for (std::size_t k = 0; k < rt.size(); ++k) {
    if (!rt.is_event(k)) continue;
    const std::size_t i = rt.subject[k];
    slots.push_back({rt.dN1[k] ? i : cohort.size() + i, rt.at_risk[k]});
  }
  return slots;
}

}  // namespace

WeightDraw draw_weights(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort, Stream& rng) {
  const auto slots = active_slots(rt, cohort);
  std::vector<std::int64_t> at_risk;
  at_risk.reserve(slots.size());
  for (const auto& s : slots) at_risk.push_back(s.at_risk);
  const WeightSampler sampler(scheme, std::move(at_risk));
  std::vector<double> compact(slots.size());
  sampler.draw(rng, compact);

  WeightDraw draw{std::vector<double>(2 * cohort.size(), 0.0), std::vector<std::uint8_t>(2 * cohort.size(), 0)};
  for (std::size_t j = 0; j < slots.size(); ++j) {
    draw.weights[slots[j].slot] = compact[j];
    draw.slot_active[slots[j].slot] = 1;
  }
  return draw;
}

std::vector<SlotMoments> conditional_moments(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort) {
  std::vector<SlotMoments> moments(2 * cohort.size());
  for (const auto& s : active_slots(rt, cohort)) moments[s.slot] = slot_moments(scheme, s.at_risk);
  return moments;
}

ConditionDiagnostics diagnose_conditions(MultiplierScheme scheme, const RiskTable& rt, const Cohort& cohort,
                                         const DiagnosticThresholds& thresholds) {
  ConditionDiagnostics d;
  d.n = cohort.size();
  const double n = static_cast<double>(d.n);
  bool first = true;
  for (const auto& s : active_slots(rt, cohort)) {
    const SlotMoments m = slot_moments(scheme, s.at_risk);
    ++d.active_slots;
    d.max_abs_mean_sqrt_n = std::max(d.max_abs_mean_sqrt_n, std::abs(m.mean) * std::sqrt(n));
    d.max_variance_gap = std::max(d.max_variance_gap, std::abs(m.variance - 1.0));
    d.max_fourth_over_n = std::max(d.max_fourth_over_n, m.fourth / n);
    d.min_at_risk = first ? s.at_risk : std::min(d.min_at_risk, s.at_risk);
    first = false;
  }
  d.mean_flag = d.max_abs_mean_sqrt_n > thresholds.mean;
  d.variance_flag = d.max_variance_gap > thresholds.variance;
  d.fourth_flag = d.max_fourth_over_n > thresholds.fourth;
  return d;
}

}  // namespace ddmb
