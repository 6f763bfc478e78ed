#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ddmb/survival_data.hpp"

namespace ddmb::testing {

inline Cohort make_cohort(const std::vector<double>& exits, const std::vector<int>& causes,
                          const std::vector<double>& entries = {}) {
  Cohort c;
  for (std::size_t i = 0; i < exits.size(); ++i) {
    Observation o;
    o.id = std::to_string(i + 1);
    o.entry = entries.empty() ? 0.0 : entries[i];
    o.exit = exits[i];
    o.cause = static_cast<Cause>(causes[i]);
    c.observations.push_back(o);
  }
  return c;
}

/// Random competing-risks cohort with exponential latent times, optional
/// censoring and optional left truncation; exits are continuous (tie-free).
inline Cohort random_cohort(std::size_t n, std::uint64_t seed, bool censor = true, bool truncate = false) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> ev1(0.3), ev2(0.2), cens(0.25);
  std::uniform_real_distribution<double> entry_dist(0.0, 1.0);
  Cohort c;
  while (c.size() < n) {
    const double entry = truncate ? entry_dist(gen) : 0.0;
    const double t1 = ev1(gen), t2 = ev2(gen);
    const double tc = censor ? cens(gen) : INFINITY;
    const double t = std::min({t1, t2, tc});
    if (t <= entry) continue;
    Observation o;
    o.id = std::to_string(c.size() + 1);
    o.entry = entry;
    o.exit = t;
    o.cause = t == tc ? Cause::Censored : (t == t1 ? Cause::Event1 : Cause::Event2);
    c.observations.push_back(o);
  }
  return c;
}

}  // namespace ddmb::testing
