#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace ddmb {

/// Observed status of a subject at its exit time.
enum class Cause : std::uint8_t { Censored = 0, Event1 = 1, Event2 = 2 };

/// One subject: entry (left-truncation) time, exit time, and the cause
/// observed at exit.
struct Observation {
  std::string id;
  double entry = 0.0;
  double exit = 0.0;
  Cause cause = Cause::Censored;
  int group = 1;
};

struct Cohort {
  std::vector<Observation> observations;

  std::size_t size() const { return observations.size(); }
  bool empty() const { return observations.empty(); }

  /// True if at least one subject has an observed event of either cause.
  bool has_events() const;
  std::size_t count(Cause cause) const;
  bool has_distinct_exits() const;
  /// Subjects of one group, in input order.
  Cohort group(int g) const;
};

/// Column names for CSV ingestion. Optional columns may be absent from the
/// header.
struct CsvSchema {
  std::string id = "id";
  std::string entry = "entry";
  std::string time = "time";
  std::string status = "status";
  std::string group = "group";
};

/// Reads a comma-separated file with a header row. Throws InputError naming
/// the offending line for malformed rows, status codes outside {0,1,2},
/// exit <= entry, or a file without data rows.
Cohort ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Cohort parse_csv(std::istream& in, const CsvSchema& schema = {},
                 const std::string& source = "<stream>");

/// Makes exit times pairwise distinct. Every group of k tied times t has its
/// members (in input order) moved to t, t+eps, ..., t+(k-1)eps, where eps is
/// half the smallest positive gap between distinct times divided by the
/// largest tie-group size. When all exits coincide the gap is taken as the
/// common time itself. Tie-free cohorts are returned unchanged.
Cohort break_ties(const Cohort& cohort);

/// Counting-process view of a tie-free cohort: one row per exit time.
struct RiskTable {
  std::vector<double> times;
  /// Y(t_k) = #{i : entry_i < t_k <= exit_i}.
  std::vector<std::int64_t> at_risk;
  std::vector<std::uint8_t> dN1;
  std::vector<std::uint8_t> dN2;
  /// Index into the cohort of the subject exiting at t_k.
  std::vector<std::size_t> subject;
  std::size_t n_subjects = 0;
  // Needed for at-risk counts at arbitrary times.
  std::vector<double> sorted_entries;
  std::vector<double> sorted_exits;

  std::size_t size() const { return times.size(); }
  bool is_event(std::size_t k) const { return dN1[k] + dN2[k] > 0; }
  /// Number at risk just before t (same convention as at_risk, for any t).
  std::int64_t at_risk_at(double t) const;
};

/// Throws std::invalid_argument if the cohort has tied exit times.
RiskTable build_risk_table(const Cohort& cohort);

}  // namespace ddmb
