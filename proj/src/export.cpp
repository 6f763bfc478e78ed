#include "ddmb/export.hpp"

#include <cstdio>
#include <sstream>

namespace ddmb {

Json metadata(std::string_view command, const Json& flags, std::uint64_t seed) {
  Json meta;
  meta["tool"] = "ddmb";
  meta["version"] = std::string(kVersion);
  meta["command"] = std::string(command);
  meta["seed"] = seed;
  meta["flags"] = flags;
  return meta;
}

std::string csv_preamble(const Json& meta) {
  std::ostringstream out;
  for (const auto& [key, value] : meta.items()) {
    out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  return out.str();
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string step_function_csv(const StepFunction& f, std::string_view value_column, const Json& meta) {
  std::ostringstream out;
  out << csv_preamble(meta) << "time," << value_column << '\n';
  for (std::size_t k = 0; k < f.size(); ++k) out << format_number(f.times[k]) << ',' << format_number(f.values[k]) << '\n';
  return out.str();
}

Json step_function_json(const StepFunction& f) {
  Json j;
  j["value_before_first"] = f.value_before_first;
  j["time"] = f.times;
  j["value"] = f.values;
  return j;
}

std::string band_csv(const ConfidenceBand& band, const Json& meta) {
  std::ostringstream out;
  out << csv_preamble(meta) << "time,estimate,lower,upper\n";
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    out << format_number(band.grid[k]) << ',' << format_number(band.estimate[k]) << ','
        << format_number(band.lower[k]) << ',' << format_number(band.upper[k]) << '\n';
  }
  return out.str();
}

Json band_json(const ConfidenceBand& band) {
  Json j;
  j["scheme"] = std::string(to_string(band.scheme));
  j["band_type"] = std::string(to_string(band.band_type));
  j["transform"] = std::string(to_string(band.transform));
  j["interval"] = {band.t1, band.t2};
  j["n"] = band.n;
  j["replicates"] = band.replicates;
  j["alpha"] = band.alpha;
  j["q"] = band.quantile_q;
  j["area"] = band.area;
  j["time"] = band.grid;
  j["estimate"] = band.estimate;
  j["lower"] = band.lower;
  j["upper"] = band.upper;
  return j;
}

Json test_result_json(const TestResult& result, bool with_replicates) {
  Json j;
  j["statistic"] = result.statistic;
  j["critical_value"] = result.critical_value;
  j["p_value"] = result.p_value;
  j["alpha"] = result.alpha;
  j["reject"] = result.reject;
  j["adjustment_factor"] = result.adjustment;
  j["replicates"] = result.replicate_stats.size();
  if (with_replicates) j["replicate_stats"] = result.replicate_stats;
  return j;
}

Json diagnostics_json(const ConditionDiagnostics& d) {
  Json j;
  j["n"] = d.n;
  j["active_slots"] = d.active_slots;
  j["min_at_risk_at_event"] = d.min_at_risk;
  j["max_abs_mean_sqrt_n"] = d.max_abs_mean_sqrt_n;
  j["max_variance_gap"] = d.max_variance_gap;
  j["max_fourth_moment_over_n"] = d.max_fourth_over_n;
  j["flags"] = {{"mean", d.mean_flag}, {"variance", d.variance_flag}, {"fourth_moment", d.fourth_flag}};
  j["ok"] = d.ok();
  return j;
}

Json study_json(const StudyReport& report) {
  Json j;
  j["event_mix"] = {{"event1", report.mix.event1}, {"event2", report.mix.event2}, {"censored", report.mix.censored}};
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cell;
    cell["n"] = c.n;
    cell["scheme"] = std::string(to_string(c.scheme));
    cell["band_type"] = std::string(to_string(c.band_type));
    cell["runs"] = c.runs;
    cell["covered"] = c.covered;
    cell["inadmissible"] = c.inadmissible;
    cell["coverage_percent"] = c.coverage;
    cell["mean_area"] = c.mean_area;
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

std::string study_csv(const StudyReport& report, const Json& meta) {
  std::ostringstream out;
  out << csv_preamble(meta);
  out << "# event_mix: " << format_number(report.mix.event1) << ',' << format_number(report.mix.event2) << ','
      << format_number(report.mix.censored) << '\n';
  out << "n,scheme,band_type,runs,covered,inadmissible,coverage_percent,mean_area\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << to_string(c.scheme) << ',' << to_string(c.band_type) << ',' << c.runs << ',' << c.covered
        << ',' << c.inadmissible << ',' << format_number(c.coverage) << ',' << format_number(c.mean_area) << '\n';
  }
  return out.str();
}

namespace {

Json rates_json(const RejectionRates& r) {
  Json j;
  j["runs"] = r.runs;
  j["inadmissible"] = r.inadmissible;
  j["ks_rejections"] = r.ks_rejections;
  j["cvm_rejections"] = r.cvm_rejections;
  j["ks_percent"] = r.ks;
  j["cvm_percent"] = r.cvm;
  return j;
}

}  // namespace

Json size_power_json(const SizePowerReport& report) {
  Json j;
  if (report.config.run_null) j["null"] = rates_json(report.null_rates);
  if (report.config.run_alternative) j["alternative"] = rates_json(report.alt_rates);
  return j;
}

std::string size_power_csv(const SizePowerReport& report, const Json& meta) {
  std::ostringstream out;
  out << csv_preamble(meta) << "scenario,runs,inadmissible,ks_percent,cvm_percent\n";
  auto row = [&](const char* name, const RejectionRates& r) {
    out << name << ',' << r.runs << ',' << r.inadmissible << ',' << format_number(r.ks) << ','
        << format_number(r.cvm) << '\n';
  };
  if (report.config.run_null) row("null", report.null_rates);
  if (report.config.run_alternative) row("alternative", report.alt_rates);
  return out.str();
}

}  // namespace ddmb
