#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ddmb/estimators.hpp"
#include "ddmb/inference.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/simulation.hpp"

namespace ddmb {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = DDMB_VERSION;

/// Provenance block embedded in every output: tool version, command, seed
/// and the full flag set.
Json metadata(std::string_view command, const Json& flags, std::uint64_t seed);

/// "# key: value" comment lines carrying the metadata, for CSV outputs.
std::string csv_preamble(const Json& meta);

std::string format_number(double value);

std::string step_function_csv(const StepFunction& f, std::string_view value_column, const Json& meta);
Json step_function_json(const StepFunction& f);

std::string band_csv(const ConfidenceBand& band, const Json& meta);
Json band_json(const ConfidenceBand& band);

Json test_result_json(const TestResult& result, bool with_replicates = false);
Json diagnostics_json(const ConditionDiagnostics& d);

Json study_json(const StudyReport& report);
std::string study_csv(const StudyReport& report, const Json& meta);

Json size_power_json(const SizePowerReport& report);
std::string size_power_csv(const SizePowerReport& report, const Json& meta);

}  // namespace ddmb
