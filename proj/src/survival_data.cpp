#include "ddmb/survival_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "ddmb/error.hpp"

namespace ddmb {

bool Cohort::has_events() const {
  return std::any_of(observations.begin(), observations.end(),
                     [](const Observation& o) { return o.cause != Cause::Censored; });
}

std::size_t Cohort::count(Cause cause) const {
  return static_cast<std::size_t>(std::count_if(observations.begin(), observations.end(),
                                                [cause](const Observation& o) { return o.cause == cause; }));
}

bool Cohort::has_distinct_exits() const {
  std::vector<double> exits;
  exits.reserve(size());
  for (const auto& o : observations) exits.push_back(o.exit);
  std::sort(exits.begin(), exits.end());
  return std::adjacent_find(exits.begin(), exits.end()) == exits.end();
}

Cohort Cohort::group(int g) const {
  Cohort out;
  for (const auto& o : observations)
    if (o.group == g) out.observations.push_back(o);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  fields.push_back(trim(line.substr(start)));
  return fields;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view text, const std::string& column, const std::string& source,
                    std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    fail(source, line, "cannot parse " + column + " value '" + std::string(text) + "'");
  return value;
}

long parse_int(std::string_view text, const std::string& column, const std::string& source,
               std::size_t line) {
  long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    // accept integral floats such as "1.0"
    const double d = parse_double(text, column, source, line);
    if (d != std::floor(d)) fail(source, line, column + " must be an integer, got '" + std::string(text) + "'");
    return static_cast<long>(d);
  }
  return value;
}

}  // namespace

Cohort parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    for (auto f : split_fields(line)) header.push_back(lower(f));
    break;
  }
  if (header.empty()) throw InputError(source + ": empty file (no header row)");

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), lower(name));
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = find_column(schema.id);
  const auto entry_col = find_column(schema.entry);
  const auto time_col = find_column(schema.time);
  const auto status_col = find_column(schema.status);
  const auto group_col = find_column(schema.group);
  if (!time_col) throw InputError(source + ": header lacks required column '" + schema.time + "'");
  if (!status_col) throw InputError(source + ": header lacks required column '" + schema.status + "'");

  Cohort cohort;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()));
    Observation obs;
    obs.id = id_col ? std::string(fields[*id_col]) : std::to_string(cohort.size() + 1);
    obs.entry = entry_col ? parse_double(fields[*entry_col], schema.entry, source, line_no) : 0.0;
    obs.exit = parse_double(fields[*time_col], schema.time, source, line_no);
    const long status = parse_int(fields[*status_col], schema.status, source, line_no);
    if (status < 0 || status > 2)
      fail(source, line_no, "status " + std::to_string(status) + " outside {0,1,2}");
    obs.cause = static_cast<Cause>(status);
    if (group_col) {
      const long g = parse_int(fields[*group_col], schema.group, source, line_no);
      if (g != 1 && g != 2) fail(source, line_no, "group " + std::to_string(g) + " outside {1,2}");
      obs.group = static_cast<int>(g);
    }
    if (obs.entry < 0.0) fail(source, line_no, "negative entry time");
    if (!(obs.exit > obs.entry)) fail(source, line_no, "exit <= entry");
    cohort.observations.push_back(std::move(obs));
  }
  if (cohort.empty()) throw InputError(source + ": empty file (no data rows)");
  return cohort;
}

Cohort ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path.string() + "'");
  return parse_csv(in, schema, path.string());
}

Cohort break_ties(const Cohort& cohort) {
  const std::size_t n = cohort.size();
  if (n < 2) return cohort;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cohort.observations[a].exit < cohort.observations[b].exit;
  });

  double min_gap = std::numeric_limits<double>::infinity();
  std::size_t max_group = 1;
  for (std::size_t k = 0; k < n;) {
    std::size_t j = k;
    const double t = cohort.observations[order[k]].exit;
    while (j < n && cohort.observations[order[j]].exit == t) ++j;
    max_group = std::max(max_group, j - k);
    if (j < n) min_gap = std::min(min_gap, cohort.observations[order[j]].exit - t);
    k = j;
  }
  if (max_group == 1) return cohort;
  if (!std::isfinite(min_gap)) min_gap = cohort.observations[order[0]].exit;
  const double eps = 0.5 * min_gap / static_cast<double>(max_group);

  Cohort out = cohort;
  for (std::size_t k = 0; k < n;) {
    std::size_t j = k;
    const double t = cohort.observations[order[k]].exit;
    while (j < n && cohort.observations[order[j]].exit == t) ++j;
    // stable_sort keeps input order within the tie group
    for (std::size_t r = k + 1; r < j; ++r)
      out.observations[order[r]].exit = t + static_cast<double>(r - k) * eps;
    k = j;
  }
  return out;
}

std::int64_t RiskTable::at_risk_at(double t) const {
  const auto entered = std::lower_bound(sorted_entries.begin(), sorted_entries.end(), t) - sorted_entries.begin();
  const auto left = std::lower_bound(sorted_exits.begin(), sorted_exits.end(), t) - sorted_exits.begin();
  return static_cast<std::int64_t>(entered - left);
}

RiskTable build_risk_table(const Cohort& cohort) {
  const std::size_t n = cohort.size();
  RiskTable rt;
  rt.n_subjects = n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cohort.observations[a].exit < cohort.observations[b].exit;
  });
  rt.sorted_entries.reserve(n);
  rt.sorted_exits.reserve(n);
  for (const auto& o : cohort.observations) {
    rt.sorted_entries.push_back(o.entry);
    rt.sorted_exits.push_back(o.exit);
  }
  std::sort(rt.sorted_entries.begin(), rt.sorted_entries.end());
  std::sort(rt.sorted_exits.begin(), rt.sorted_exits.end());
  if (std::adjacent_find(rt.sorted_exits.begin(), rt.sorted_exits.end()) != rt.sorted_exits.end())
    throw std::invalid_argument("build_risk_table: exit times must be distinct (apply break_ties first)");

  rt.times.reserve(n);
  rt.at_risk.reserve(n);
  rt.dN1.reserve(n);
  rt.dN2.reserve(n);
  rt.subject.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& o = cohort.observations[order[k]];
    rt.times.push_back(o.exit);
    rt.at_risk.push_back(rt.at_risk_at(o.exit));
    rt.dN1.push_back(o.cause == Cause::Event1 ? 1 : 0);
    rt.dN2.push_back(o.cause == Cause::Event2 ? 1 : 0);
    rt.subject.push_back(order[k]);
  }
  return rt;
}

}  // namespace ddmb
