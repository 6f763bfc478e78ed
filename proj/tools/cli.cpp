#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "ddmb/error.hpp"
#include "ddmb/estimators.hpp"
#include "ddmb/export.hpp"
#include "ddmb/inference.hpp"
#include "ddmb/multipliers.hpp"
#include "ddmb/resampling.hpp"
#include "ddmb/simulation.hpp"
#include "ddmb/survival_data.hpp"

namespace ddmb::cli {

namespace {

struct CommonOptions {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  CsvSchema schema;
  int group = 0;  // 0 = all subjects
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("DDMB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("DDMB_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return 1;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write output file '" + path + "'");
  file << text;
}

void add_input_options(CLI::App* cmd, CommonOptions& opt, bool required = true) {
  auto* in = cmd->add_option("-i,--input", opt.input, "Input CSV (header: id?, entry?, time, status, group?)");
  if (required) in->required();
  cmd->add_option("--time-col", opt.schema.time, "Name of the exit-time column")->capture_default_str();
  cmd->add_option("--status-col", opt.schema.status, "Name of the status column (0/1/2)")->capture_default_str();
  cmd->add_option("--entry-col", opt.schema.entry, "Name of the entry-time column")->capture_default_str();
  cmd->add_option("--id-col", opt.schema.id, "Name of the id column")->capture_default_str();
  cmd->add_option("--group-col", opt.schema.group, "Name of the group column")->capture_default_str();
  cmd->add_option("--group", opt.group, "Restrict to one group (1 or 2)")->check(CLI::Range(0, 2));
}

void add_output_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("-o,--out", opt.output, "Output path (default: standard output)");
  cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

void add_stochastic_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--seed", opt.seed, "Master seed (default: $DDMB_SEED or 1)");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores); results do not depend on it");
}

Json schema_json(const CommonOptions& opt) {
  return {{"input", opt.input},           {"time_col", opt.schema.time},   {"status_col", opt.schema.status},
          {"entry_col", opt.schema.entry}, {"id_col", opt.schema.id},       {"group_col", opt.schema.group},
          {"group", opt.group},            {"format", opt.format},          {"out", opt.output}};
}

Cohort load_cohort(const std::string& path, const CommonOptions& opt, Context& ctx) {
  Cohort cohort = ingest_csv(path, opt.schema);
  if (opt.group != 0) {
    cohort = cohort.group(opt.group);
    if (cohort.empty()) throw InputError("no subjects in group " + std::to_string(opt.group));
  }
  if (!cohort.has_events()) ctx.err << "warning: " << path << " contains no events; estimators are degenerate\n";
  return cohort;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const CommonOptions& opt, Context& ctx) {
  const Cohort cohort = break_ties(load_cohort(opt.input, opt, ctx));
  const RiskTable rt = build_risk_table(cohort);
  const Json meta = metadata("estimate", schema_json(opt), opt.seed);
  const StepFunction km = kaplan_meier(rt);
  const StepFunction na1 = nelson_aalen(rt, Cause::Event1);
  const StepFunction na2 = nelson_aalen(rt, Cause::Event2);
  const StepFunction cif1 = aalen_johansen(rt, Cause::Event1);
  const StepFunction cif2 = aalen_johansen(rt, Cause::Event2);
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["n"] = cohort.size();
    doc["n_grid"] = rt.size();
    doc["at_risk"] = rt.at_risk;
    doc["km"] = step_function_json(km);
    doc["na1"] = step_function_json(na1);
    doc["na2"] = step_function_json(na2);
    doc["cif1"] = step_function_json(cif1);
    doc["cif2"] = step_function_json(cif2);
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
    return kExitOk;
  }
  const std::pair<const char*, const StepFunction*> tables[] = {
      {"km", &km}, {"na1", &na1}, {"na2", &na2}, {"cif1", &cif1}, {"cif2", &cif2}};
  if (opt.output.empty() || opt.output == "-") {
    for (const auto& [name, f] : tables) ctx.out << "# table: " << name << '\n' << step_function_csv(*f, name, meta);
    return kExitOk;
  }
  std::filesystem::create_directories(opt.output);
  for (const auto& [name, f] : tables)
    emit(step_function_csv(*f, name, meta), (std::filesystem::path(opt.output) / (std::string(name) + ".csv")).string(),
         ctx.out);
  return kExitOk;
}

// ---------------------------------------------------------------- band / ci / test1

struct BandOptions {
  std::vector<double> interval{0.5, 5.0};
  std::string scheme = "weird";
  std::string type = "ep";
  std::string transform = "loglog";
  std::size_t reps = 999;
  double alpha = 0.05;
};

void add_band_options(CLI::App* cmd, BandOptions& b, bool with_interval = true) {
  if (with_interval)
    cmd->add_option("--interval", b.interval, "Time interval t1 t2")->expected(2)->capture_default_str();
  cmd->add_option("--scheme", b.scheme, "Multiplier scheme")
      ->check(CLI::IsMember({"normal", "poisson", "weird"}))
      ->capture_default_str();
  cmd->add_option("--type", b.type, "Band weight: hw (Hall-Wellner) or ep (equal precision)")
      ->check(CLI::IsMember({"hw", "ep"}))
      ->capture_default_str();
  cmd->add_option("--transform", b.transform, "Transformation")
      ->check(CLI::IsMember({"loglog", "identity"}))
      ->capture_default_str();
  cmd->add_option("--reps", b.reps, "Bootstrap replicates B")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--alpha", b.alpha, "Nominal level")->check(CLI::Range(1e-9, 1.0))->capture_default_str();
}

BandRequest band_request(const BandOptions& b, const CommonOptions& opt) {
  BandRequest r;
  r.t1 = b.interval.at(0);
  r.t2 = b.interval.at(1);
  r.scheme = parse_scheme(b.scheme);
  r.band_type = parse_band_type(b.type);
  r.transform = parse_transform(b.transform);
  r.replicates = b.reps;
  r.alpha = b.alpha;
  r.seed = opt.seed;
  r.threads = opt.threads;
  return r;
}

Json band_flags(const BandOptions& b, const CommonOptions& opt) {
  Json flags = schema_json(opt);
  flags["interval"] = b.interval;
  flags["scheme"] = b.scheme;
  flags["type"] = b.type;
  flags["transform"] = b.transform;
  flags["reps"] = b.reps;
  flags["alpha"] = b.alpha;
  return flags;
}

int cmd_band(const CommonOptions& opt, const BandOptions& b, Context& ctx) {
  const Cohort cohort = load_cohort(opt.input, opt, ctx);
  const ConfidenceBand band = confidence_band(cohort, band_request(b, opt));
  Json meta = metadata("band", band_flags(b, opt), opt.seed);
  meta["result"] = {{"scheme", b.scheme}, {"replicates", b.reps}, {"seed", opt.seed},
                    {"q", band.quantile_q}, {"area", band.area}};
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["band"] = band_json(band);
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
  } else {
    emit(band_csv(band, meta), opt.output, ctx.out);
  }
  return kExitOk;
}

int cmd_ci(const CommonOptions& opt, const BandOptions& b, const std::vector<double>& at, Context& ctx) {
  const Cohort cohort = load_cohort(opt.input, opt, ctx);
  BandRequest request = band_request(b, opt);
  Json flags = band_flags(b, opt);
  flags.erase("interval");
  flags["at"] = at;
  const Json meta = metadata("ci", flags, opt.seed);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << csv_preamble(meta) << "time,estimate,lower,upper,q\n";
  for (double s : at) {
    const ConfidenceBand ci = pointwise_ci(cohort, s, request);
    rows.push_back({{"time", s},
                    {"estimate", ci.estimate.front()},
                    {"lower", ci.lower.front()},
                    {"upper", ci.upper.front()},
                    {"q", ci.quantile_q}});
    csv << format_number(s) << ',' << format_number(ci.estimate.front()) << ',' << format_number(ci.lower.front())
        << ',' << format_number(ci.upper.front()) << ',' << format_number(ci.quantile_q) << '\n';
  }
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["intervals"] = std::move(rows);
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
  } else {
    emit(csv.str(), opt.output, ctx.out);
  }
  return kExitOk;
}

StepFunction read_reference(const std::string& path, double initial) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open reference file '" + path + "'");
  StepFunction f;
  f.value_before_first = initial;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream row(line);
    std::string time_text, value_text;
    if (!std::getline(row, time_text, ',') || !std::getline(row, value_text, ','))
      throw InputError(path + ":" + std::to_string(line_no) + ": expected time,value");
    try {
      const double t = std::stod(time_text);
      if (!f.times.empty() && !(t > f.times.back()))
        throw InputError(path + ":" + std::to_string(line_no) + ": times must be strictly increasing");
      f.times.push_back(t);
      f.values.push_back(std::stod(value_text));
    } catch (const std::logic_error&) {
      throw InputError(path + ":" + std::to_string(line_no) + ": cannot parse number");
    }
  }
  if (f.times.empty()) throw InputError(path + ": reference curve has no rows");
  return f;
}

int cmd_test1(const CommonOptions& opt, const BandOptions& b, const std::string& reference_path,
              double reference_initial, Context& ctx) {
  const Cohort cohort = load_cohort(opt.input, opt, ctx);
  const StepFunction reference = read_reference(reference_path, reference_initial);
  const TestResult result = one_sample_ks(cohort, ReferenceCurve::step(reference), band_request(b, opt));
  Json flags = band_flags(b, opt);
  flags["reference"] = reference_path;
  flags["reference_initial"] = reference_initial;
  Json doc;
  doc["meta"] = metadata("test1", flags, opt.seed);
  doc["test"] = test_result_json(result);
  emit(doc.dump(2) + "\n", opt.output, ctx.out);
  return kExitOk;
}

// ---------------------------------------------------------------- test2

struct Test2Options {
  std::string input2;
  std::string kind = "both";
  std::string adjust = "none";
  double weight = 1.0;
};

int cmd_test2(const CommonOptions& opt, const BandOptions& b, const Test2Options& t, Context& ctx) {
  Cohort first;
  Cohort second;
  if (!t.input2.empty()) {
    first = load_cohort(opt.input, opt, ctx);
    second = load_cohort(t.input2, opt, ctx);
  } else {
    const Cohort all = ingest_csv(opt.input, opt.schema);
    first = all.group(1);
    second = all.group(2);
    if (first.empty() || second.empty())
      throw InputError("test2 needs --input2 or a group column with both groups 1 and 2");
  }
  TwoSampleRequest request;
  request.t1 = b.interval.at(0);
  request.t2 = b.interval.at(1);
  request.scheme = parse_scheme(b.scheme);
  request.replicates = b.reps;
  request.alpha = b.alpha;
  request.seed = opt.seed;
  request.threads = opt.threads;
  request.adjust = parse_adjustment(t.adjust);
  request.weight = WeightFunction::constant(t.weight);
  const TwoSampleResult result = two_sample_tests(first, second, request);

  Json flags = schema_json(opt);
  flags["input2"] = t.input2;
  flags["interval"] = b.interval;
  flags["scheme"] = b.scheme;
  flags["reps"] = b.reps;
  flags["alpha"] = b.alpha;
  flags["kind"] = t.kind;
  flags["adjust"] = t.adjust;
  flags["weight"] = t.weight;
  Json meta = metadata("test2", flags, opt.seed);
  meta["adjustment_factor"] = result.ks.adjustment;
  meta["n1"] = first.size();
  meta["n2"] = second.size();
  Json doc;
  doc["meta"] = meta;
  if (t.kind == "ks" || t.kind == "both") doc["ks"] = test_result_json(result.ks);
  if (t.kind == "cvm" || t.kind == "both") doc["cvm"] = test_result_json(result.cvm);
  emit(doc.dump(2) + "\n", opt.output, ctx.out);
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

int cmd_diagnose(const CommonOptions& opt, const std::string& scheme_name, const DiagnosticThresholds& thresholds,
                 Context& ctx) {
  const Cohort cohort = break_ties(load_cohort(opt.input, opt, ctx));
  const RiskTable rt = build_risk_table(cohort);
  const MultiplierScheme scheme = parse_scheme(scheme_name);
  const ConditionDiagnostics d = diagnose_conditions(scheme, rt, cohort, thresholds);
  Json flags = schema_json(opt);
  flags["scheme"] = scheme_name;
  flags["mean_tol"] = thresholds.mean;
  flags["variance_tol"] = thresholds.variance;
  flags["fourth_tol"] = std::isinf(thresholds.fourth) ? Json("off") : Json(thresholds.fourth);
  const Json meta = metadata("diagnose", flags, opt.seed);
  const Json diag = diagnostics_json(d);
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["diagnostics"] = diag;
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
  } else {
    std::ostringstream csv;
    csv << csv_preamble(meta) << "metric,value\n";
    for (const auto& [key, value] : diag.items())
      if (!value.is_object()) csv << key << ',' << value.dump() << '\n';
    emit(csv.str(), opt.output, ctx.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::vector<std::size_t> n_list{100, 636};
  std::vector<std::string> schemes{"normal", "poisson", "weird"};
  std::vector<std::string> bands{"hw", "ep"};
  std::string transform = "loglog";
  std::size_t nsim = 1000;
  std::size_t reps = 999;
  std::vector<double> interval{0.5, 5.0};
  double alpha = 0.05;
  std::vector<double> mix{kSurrogateMix.event1, kSurrogateMix.event2, kSurrogateMix.censored};
  double admin_end = 5.0;
  double at_risk_end = kAtRiskAtEnd;
  // sizepower
  std::size_t n1 = 200;
  std::size_t n2 = 200;
  std::string scheme = "weird";
  std::string adjust = "none";
  double hazard1_factor = 2.0;
  // cohort
  std::size_t n = 636;
};

Json simulate_flags(const SimulateOptions& s, const CommonOptions& opt) {
  Json flags;
  flags["mix"] = s.mix;
  flags["admin_end"] = s.admin_end;
  flags["at_risk_end"] = s.at_risk_end;
  flags["format"] = opt.format;
  flags["out"] = opt.output;
  return flags;
}

DGPSpec simulate_spec(const SimulateOptions& s) {
  if (s.mix.size() != 3) throw InputError("--mix needs three percentages");
  return calibrate_rates({s.mix[0], s.mix[1], s.mix[2]}, s.admin_end, s.at_risk_end);
}

int cmd_simulate_coverage(const CommonOptions& opt, const SimulateOptions& s, Context& ctx) {
  CoverageConfig config;
  config.spec = simulate_spec(s);
  config.n_list = s.n_list;
  config.schemes.clear();
  for (const auto& name : s.schemes) config.schemes.push_back(parse_scheme(name));
  config.band_types.clear();
  for (const auto& name : s.bands) config.band_types.push_back(parse_band_type(name));
  config.transform = parse_transform(s.transform);
  config.n_sim = s.nsim;
  config.replicates = s.reps;
  config.t1 = s.interval.at(0);
  config.t2 = s.interval.at(1);
  config.alpha = s.alpha;
  config.seed = opt.seed;
  config.threads = opt.threads;
  const StudyReport report = coverage_study(config);

  Json flags = simulate_flags(s, opt);
  flags["n_list"] = s.n_list;
  flags["schemes"] = s.schemes;
  flags["bands"] = s.bands;
  flags["transform"] = s.transform;
  flags["nsim"] = s.nsim;
  flags["reps"] = s.reps;
  flags["interval"] = s.interval;
  flags["alpha"] = s.alpha;
  const Json meta = metadata("simulate coverage", flags, opt.seed);
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["report"] = study_json(report);
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
  } else {
    emit(study_csv(report, meta), opt.output, ctx.out);
  }
  return kExitOk;
}

int cmd_simulate_sizepower(const CommonOptions& opt, const SimulateOptions& s, Context& ctx) {
  SizePowerConfig config;
  config.null_spec = simulate_spec(s);
  config.alt_spec = config.null_spec;
  config.alt_spec.hazard1 *= s.hazard1_factor;
  config.n1 = s.n1;
  config.n2 = s.n2;
  config.scheme = parse_scheme(s.scheme);
  config.adjust = parse_adjustment(s.adjust);
  config.n_sim = s.nsim;
  config.replicates = s.reps;
  config.t1 = s.interval.at(0);
  config.t2 = s.interval.at(1);
  config.alpha = s.alpha;
  config.seed = opt.seed;
  config.threads = opt.threads;
  const SizePowerReport report = size_power_study(config);

  Json flags = simulate_flags(s, opt);
  flags["n1"] = s.n1;
  flags["n2"] = s.n2;
  flags["scheme"] = s.scheme;
  flags["adjust"] = s.adjust;
  flags["hazard1_factor"] = s.hazard1_factor;
  flags["nsim"] = s.nsim;
  flags["reps"] = s.reps;
  flags["interval"] = s.interval;
  flags["alpha"] = s.alpha;
  const Json meta = metadata("simulate sizepower", flags, opt.seed);
  if (opt.format == "json") {
    Json doc;
    doc["meta"] = meta;
    doc["report"] = size_power_json(report);
    emit(doc.dump(2) + "\n", opt.output, ctx.out);
  } else {
    emit(size_power_csv(report, meta), opt.output, ctx.out);
  }
  return kExitOk;
}

int cmd_simulate_cohort(const CommonOptions& opt, const SimulateOptions& s, Context& ctx) {
  DGPSpec spec = simulate_spec(s);
  spec.n = s.n;
  spec.seed = opt.seed;
  const Cohort cohort = generate_cohort(spec);
  Json flags = simulate_flags(s, opt);
  flags["n"] = s.n;
  std::ostringstream csv;
  csv << csv_preamble(metadata("simulate cohort", flags, opt.seed)) << "id,entry,time,status\n";
  for (const auto& o : cohort.observations)
    csv << o.id << ',' << format_number(o.entry) << ',' << format_number(o.exit) << ','
        << static_cast<int>(o.cause) << '\n';
  emit(csv.str(), opt.output, ctx.out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Data-dependent multiplier bootstrap for competing-risks cumulative incidence functions", "ddmb"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOptions opt;
  BandOptions band;
  Test2Options test2;
  SimulateOptions sim;
  std::vector<double> ci_at;
  std::string reference_path;
  double reference_initial = 0.0;
  std::string diag_scheme = "weird";
  DiagnosticThresholds thresholds;
  std::function<int()> action;

  try {
    opt.seed = default_seed();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  auto* estimate = app.add_subcommand("estimate", "Kaplan-Meier, Nelson-Aalen and Aalen-Johansen estimates");
  add_input_options(estimate, opt);
  add_output_options(estimate, opt);
  estimate->callback([&] { action = [&] { return cmd_estimate(opt, ctx); }; });

  auto* band_cmd = app.add_subcommand("band", "Simultaneous confidence band for the cause-1 CIF");
  add_input_options(band_cmd, opt);
  add_output_options(band_cmd, opt);
  add_stochastic_options(band_cmd, opt);
  add_band_options(band_cmd, band);
  band_cmd->callback([&] { action = [&] { return cmd_band(opt, band, ctx); }; });

  auto* ci = app.add_subcommand("ci", "Pointwise confidence intervals for the cause-1 CIF");
  add_input_options(ci, opt);
  add_output_options(ci, opt);
  add_stochastic_options(ci, opt);
  add_band_options(ci, band, false);
  ci->add_option("--at", ci_at, "Time point(s)")->required();
  ci->callback([&] { action = [&] { return cmd_ci(opt, band, ci_at, ctx); }; });

  auto* test1 = app.add_subcommand("test1", "One-sample test of F1 = reference by band containment");
  add_input_options(test1, opt);
  add_output_options(test1, opt);
  add_stochastic_options(test1, opt);
  add_band_options(test1, band);
  test1->add_option("--reference", reference_path, "CSV with columns time,value (right-continuous steps)")
      ->required();
  test1->add_option("--reference-initial", reference_initial, "Reference value before its first time")
      ->capture_default_str();
  test1->callback([&] { action = [&] { return cmd_test1(opt, band, reference_path, reference_initial, ctx); }; });

  auto* test2_cmd = app.add_subcommand("test2", "Two-sample KS / CvM tests of equal cause-1 CIFs");
  add_input_options(test2_cmd, opt);
  add_output_options(test2_cmd, opt);
  add_stochastic_options(test2_cmd, opt);
  add_band_options(test2_cmd, band);
  test2_cmd->add_option("--input2", test2.input2, "Second group's CSV (otherwise split --input by group)");
  test2_cmd->add_option("--kind", test2.kind, "Test statistic")
      ->check(CLI::IsMember({"ks", "cvm", "both"}))
      ->capture_default_str();
  test2_cmd->add_option("--adjust", test2.adjust, "Conservative weight adjustment")
      ->check(CLI::IsMember({"none", "count", "risk"}))
      ->capture_default_str();
  test2_cmd->add_option("--weight", test2.weight, "Constant weight w")->check(CLI::PositiveNumber)->capture_default_str();
  test2_cmd->callback([&] { action = [&] { return cmd_test2(opt, band, test2, ctx); }; });

  auto* diagnose = app.add_subcommand("diagnose", "Finite-sample moment diagnostics of a multiplier scheme");
  add_input_options(diagnose, opt);
  add_output_options(diagnose, opt);
  diagnose->add_option("--scheme", diag_scheme, "Multiplier scheme")
      ->check(CLI::IsMember({"normal", "poisson", "weird"}))
      ->capture_default_str();
  diagnose->add_option("--mean-tol", thresholds.mean, "Flag max |mean| * sqrt(n) above this")->capture_default_str();
  diagnose->add_option("--variance-tol", thresholds.variance, "Flag max |variance - 1| above this")
      ->capture_default_str();
  diagnose->add_option("--fourth-tol", thresholds.fourth, "Flag max E[D^4]/n above this (default: off)");
  diagnose->callback([&] { action = [&] { return cmd_diagnose(opt, diag_scheme, thresholds, ctx); }; });

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo studies on the constant-hazard surrogate model");
  simulate->require_subcommand(1);
  auto add_sim_common = [&](CLI::App* cmd) {
    add_output_options(cmd, opt);
    add_stochastic_options(cmd, opt);
    cmd->add_option("--mix", sim.mix, "Target percentages: cause 1, cause 2, censored")
        ->expected(3)
        ->capture_default_str();
    cmd->add_option("--admin-end", sim.admin_end, "Administrative censoring time")->capture_default_str();
    cmd->add_option("--at-risk-end", sim.at_risk_end, "Share still at risk at the administrative end")
        ->capture_default_str();
  };
  auto* coverage = simulate->add_subcommand("coverage", "Coverage of simultaneous bands");
  add_sim_common(coverage);
  coverage->add_option("--n-list", sim.n_list, "Sample sizes")->capture_default_str();
  coverage->add_option("--schemes", sim.schemes, "Multiplier schemes")
      ->check(CLI::IsMember({"normal", "poisson", "weird"}))
      ->capture_default_str();
  coverage->add_option("--bands", sim.bands, "Band types")->check(CLI::IsMember({"hw", "ep"}))->capture_default_str();
  coverage->add_option("--transform", sim.transform, "Transformation")
      ->check(CLI::IsMember({"loglog", "identity"}))
      ->capture_default_str();
  coverage->add_option("--nsim", sim.nsim, "Simulation runs per cell")->check(CLI::PositiveNumber)->capture_default_str();
  coverage->add_option("--reps", sim.reps, "Bootstrap replicates")->check(CLI::PositiveNumber)->capture_default_str();
  coverage->add_option("--interval", sim.interval, "Band interval t1 t2")->expected(2)->capture_default_str();
  coverage->add_option("--alpha", sim.alpha, "Nominal level")->capture_default_str();
  coverage->callback([&] { action = [&] { return cmd_simulate_coverage(opt, sim, ctx); }; });

  auto* sizepower = simulate->add_subcommand("sizepower", "Size and power of the two-sample tests");
  add_sim_common(sizepower);
  sizepower->add_option("--n1", sim.n1, "Group 1 size")->capture_default_str();
  sizepower->add_option("--n2", sim.n2, "Group 2 size")->capture_default_str();
  sizepower->add_option("--scheme", sim.scheme, "Multiplier scheme")
      ->check(CLI::IsMember({"normal", "poisson", "weird"}))
      ->capture_default_str();
  sizepower->add_option("--adjust", sim.adjust, "Weight adjustment")
      ->check(CLI::IsMember({"none", "count", "risk"}))
      ->capture_default_str();
  sizepower->add_option("--hazard1-factor", sim.hazard1_factor, "Cause-1 hazard multiplier in group 2 (alternative)")
      ->capture_default_str();
  sizepower->add_option("--nsim", sim.nsim, "Simulation runs")->check(CLI::PositiveNumber)->capture_default_str();
  sizepower->add_option("--reps", sim.reps, "Bootstrap replicates")->check(CLI::PositiveNumber)->capture_default_str();
  sizepower->add_option("--interval", sim.interval, "Test interval t1 t2")->expected(2)->capture_default_str();
  sizepower->add_option("--alpha", sim.alpha, "Nominal level")->capture_default_str();
  sizepower->callback([&] { action = [&] { return cmd_simulate_sizepower(opt, sim, ctx); }; });

  auto* cohort_cmd = simulate->add_subcommand("cohort", "Write one simulated cohort as CSV");
  add_sim_common(cohort_cmd);
  cohort_cmd->add_option("--n", sim.n, "Cohort size")->capture_default_str();
  cohort_cmd->callback([&] { action = [&] { return cmd_simulate_cohort(opt, sim, ctx); }; });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    return action ? action() : kExitInput;
  } catch (const InadmissibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInadmissible;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace ddmb::cli
