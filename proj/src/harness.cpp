#include "tndipw/harness.hpp"

#include "tndipw/enumeration.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/parallel.hpp"
#include "tndipw/rng.hpp"
#include "tndipw/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace tndipw {

namespace {

constexpr AnalysisMethod kAllMethods[] = {
    AnalysisMethod::proper_tnd,      AnalysisMethod::testpos_vs_controls,     AnalysisMethod::tested_only,
    AnalysisMethod::ipw_correct,     AnalysisMethod::ipw_missing_interaction, AnalysisMethod::ipw_omitted_w,
    AnalysisMethod::ipw_omit_hcsb,   AnalysisMethod::ipw_adjust_hcsb,
};

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("'{}' is not a number for {}", s, what));
  }
}

std::uint64_t parse_u64(const std::string& s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("'{}' is not a nonnegative integer for {}", s, what));
  }
  return v;
}

// Error text travels through a CSV field; keep it on one line without separators.
std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Estimate run_method(AnalysisMethod method, const ExperimentConfig& config, const StudySample& case_control,
                    const StudySample& tnd, std::uint64_t bootstrap_seed, std::size_t bootstrap_threads) {
  switch (method) {
    case AnalysisMethod::proper_tnd: return estimate_proper_tnd(tnd, config.ci_level);
    case AnalysisMethod::testpos_vs_controls: return estimate_testpos_vs_controls(case_control, config.ci_level);
    case AnalysisMethod::tested_only: return estimate_tested_only(case_control, config.ci_level);
    default: break;
  }
  const IpwSpec spec = IpwSpec::for_variant(*ipw_variant_of(method), config.q0_override);
  Estimate e = estimate_ipw(case_control, spec);
  if (config.bootstrap_b > 0) {
    const BootstrapInterval boot =
        bootstrap_ci(case_control, spec, config.bootstrap_b, config.ci_level, bootstrap_seed, bootstrap_threads);
    e.interval = boot.interval;
    e.interval_method = IntervalMethod::percentile_bootstrap;
    e.bootstrap_failures = boot.replicates_failed;
  }
  return e;
}

std::size_t count_if_records(const Population& population, bool (*pred)(const IndividualRecord&)) {
  return static_cast<std::size_t>(std::count_if(population.records.begin(), population.records.end(), pred));
}

// Flattened scenario fields, shared by the key-value writer and reader.
std::vector<std::pair<std::string, double*>> scenario_fields(ScenarioSpec& s) {
  return {
      {"p_c", &s.p_c},
      {"p_x_given_c0", &s.p_x_given_c[0]},
      {"p_x_given_c1", &s.p_x_given_c[1]},
      {"p_u", &s.p_u},
      {"p_h", &s.p_h},
      {"infection.intercept", &s.infection.intercept},
      {"infection.x", &s.infection.x},
      {"infection.c", &s.infection.c},
      {"infection.u", &s.infection.u},
      {"infection.h", &s.infection.h},
      {"other_infection.intercept", &s.other_infection.intercept},
      {"other_infection.x", &s.other_infection.x},
      {"other_infection.c", &s.other_infection.c},
      {"other_infection.u", &s.other_infection.u},
      {"symptoms.baseline", &s.symptoms.baseline},
      {"symptoms.given_infection", &s.symptoms.given_infection},
      {"symptoms.given_other", &s.symptoms.given_other},
      {"testing.intercept", &s.testing.intercept},
      {"testing.w", &s.testing.w},
      {"testing.x", &s.testing.x},
      {"testing.c", &s.testing.c},
      {"testing.wx", &s.testing.wx},
      {"testing.h", &s.testing.h},
      {"testing.xh", &s.testing.xh},
  };
}

}  // namespace

std::string_view analysis_method_name(AnalysisMethod m) noexcept {
  switch (m) {
    case AnalysisMethod::proper_tnd: return "proper-tnd";
    case AnalysisMethod::testpos_vs_controls: return "testpos-vs-controls";
    case AnalysisMethod::tested_only: return "tested-only";
    case AnalysisMethod::ipw_correct: return "ipw-correct";
    case AnalysisMethod::ipw_missing_interaction: return "ipw-missing-interaction";
    case AnalysisMethod::ipw_omitted_w: return "ipw-omitted-w";
    case AnalysisMethod::ipw_omit_hcsb: return "ipw-omit-hcsb";
    case AnalysisMethod::ipw_adjust_hcsb: return "ipw-adjust-hcsb";
  }
  return "?";
}

AnalysisMethod parse_analysis_method(std::string_view name) {
  for (const auto m : kAllMethods) {
    if (analysis_method_name(m) == name) return m;
  }
  throw ConfigError(fmt::format("unknown method '{}'", name));
}

std::optional<IpwVariant> ipw_variant_of(AnalysisMethod m) noexcept {
  switch (m) {
    case AnalysisMethod::ipw_correct: return IpwVariant::correct;
    case AnalysisMethod::ipw_missing_interaction: return IpwVariant::missing_interaction;
    case AnalysisMethod::ipw_omitted_w: return IpwVariant::omitted_w;
    case AnalysisMethod::ipw_omit_hcsb: return IpwVariant::omit_hcsb;
    case AnalysisMethod::ipw_adjust_hcsb: return IpwVariant::adjust_hcsb;
    default: return std::nullopt;
  }
}

std::vector<AnalysisMethod> default_methods(int scenario_id) {
  if (scenario_id == 3) {
    return {AnalysisMethod::proper_tnd, AnalysisMethod::testpos_vs_controls, AnalysisMethod::tested_only,
            AnalysisMethod::ipw_omit_hcsb, AnalysisMethod::ipw_adjust_hcsb};
  }
  return {AnalysisMethod::proper_tnd,  AnalysisMethod::testpos_vs_controls,     AnalysisMethod::tested_only,
          AnalysisMethod::ipw_correct, AnalysisMethod::ipw_missing_interaction, AnalysisMethod::ipw_omitted_w};
}

Profile parse_profile(std::string_view name) {
  if (name == "desk") return Profile::desk;
  if (name == "paper") return Profile::paper;
  throw ConfigError(fmt::format("unknown profile '{}' (expected desk or paper)", name));
}

std::string_view profile_name(Profile p) noexcept { return p == Profile::desk ? "desk" : "paper"; }

void ExperimentConfig::validate() const {
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  if (population_size < 1) throw ConfigError("population_size must be positive");
  if (n_tested < 1) throw ConfigError("n_tested must be positive");
  if (n_controls < 1) throw ConfigError("n_controls must be positive");
  if (bootstrap_b == 1) throw ConfigError("bootstrap_b must be 0 (no IPW intervals) or at least 2");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError(fmt::format("ci_level {} not in (0, 1)", ci_level));
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (truth_population_size < 1) throw ConfigError("truth_population_size must be positive");
  if (q0_override && !(*q0_override > 0.0 && *q0_override < 1.0)) {
    throw ConfigError(fmt::format("q0 {} not in (0, 1)", *q0_override));
  }
  for (const auto m : methods) {
    if ((m == AnalysisMethod::ipw_adjust_hcsb) && !scenario.has_h()) {
      throw ConfigError("ipw-adjust-hcsb needs a scenario with a health-care-seeking variable (p_h > 0)");
    }
  }
  try {
    tndipw::validate(scenario);
  } catch (const InvalidSpecError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig profile_config(Profile profile, int scenario_id) {
  ExperimentConfig c;
  c.profile = profile;
  c.scenario = default_scenario(scenario_id);
  c.methods = default_methods(scenario_id);
  if (profile == Profile::paper) {
    c.population_size = 1'000'000;
    c.n_tested = 2000;
    c.n_controls = 2000;
    c.replicates = 1000;
    c.bootstrap_b = 500;
  }
  return c;
}

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t replicate_index, const Population* fixed,
                              std::size_t bootstrap_threads) {
  const std::uint64_t base = config.base_seed;
  const std::uint64_t r = replicate_index;
  std::optional<Population> owned;
  if (fixed == nullptr) {
    owned = generate_population(config.scenario, config.population_size,
                                derive_seed(base, {stream_id(Stream::population), r}));
  }
  const Population& population = fixed ? *fixed : *owned;

  ReplicateResult result;
  result.replicate = replicate_index;
  const std::size_t tested = count_if_records(population, [](const IndividualRecord& x) { return x.t == 1; });
  const std::size_t tested_symptomatic =
      count_if_records(population, [](const IndividualRecord& x) { return x.t == 1 && x.w == 1; });
  result.n_tested = std::min(config.n_tested, tested);
  result.n_controls = std::min(config.n_controls, population.size() - tested);
  result.n_tnd = std::min(config.n_tested, tested_symptomatic);

  std::optional<StudySample> case_control;
  std::string case_control_error;
  try {
    case_control = sample_case_control(population, result.n_tested, result.n_controls,
                                       derive_seed(base, {stream_id(Stream::case_control_sample), r}));
    if (config.q0_override) case_control->q0_assumed = *config.q0_override;
    result.q0 = case_control->q0_assumed;
  } catch (const Error& e) {
    case_control_error = e.what();
  }

  const bool wants_tnd = std::find(config.methods.begin(), config.methods.end(), AnalysisMethod::proper_tnd) !=
                         config.methods.end();
  std::optional<StudySample> tnd;
  std::string tnd_error;
  if (wants_tnd) {
    try {
      tnd = sample_proper_tnd(population, result.n_tnd, 0, derive_seed(base, {stream_id(Stream::tnd_sample), r}));
    } catch (const Error& e) {
      tnd_error = e.what();
    }
  }

  // Every IPW variant resamples with the same seed (common random numbers).
  const std::uint64_t bootstrap_seed = derive_seed(base, {stream_id(Stream::bootstrap), r});
  for (const auto method : config.methods) {
    MethodOutcome outcome;
    outcome.method = method;
    const bool uses_tnd = method == AnalysisMethod::proper_tnd;
    if (uses_tnd && !tnd) {
      outcome.error = "sampling: " + tnd_error;
    } else if (!uses_tnd && !case_control) {
      outcome.error = "sampling: " + case_control_error;
    } else {
      static const StudySample empty;
      try {
        outcome.estimate = run_method(method, config, case_control ? *case_control : empty, tnd ? *tnd : empty,
                                      bootstrap_seed, bootstrap_threads);
      } catch (const Error& e) {
        outcome.error = e.what();
      }
    }
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

Truth compute_truth(const ExperimentConfig& config) {
  Truth t;
  const ProspectiveTruth p = true_prospective_or(config.scenario);
  t.true_or = p.odds_ratio;
  t.non_collapsible = p.non_collapsible;
  const JointDistribution joint(config.scenario);
  t.exact_relative_or = std::exp(exact_relative_log_or(joint));
  t.target_q0 = joint.mean(Variable::t);
  const Population big = generate_population(config.scenario, config.truth_population_size,
                                             derive_seed(config.base_seed, {stream_id(Stream::truth_population)}),
                                             config.threads);
  t.true_relative_or = true_relative_or(big);
  return t;
}

const MethodSummary& ExperimentReport::summary(AnalysisMethod m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw Error(fmt::format("method '{}' is not in the report", analysis_method_name(m)));
}

ExperimentReport aggregate(const ExperimentConfig& config, const Truth& truth,
                           std::vector<ReplicateResult> replicates) {
  ExperimentReport report;
  report.config = config;
  report.truth = truth;
  double q0_sum = 0.0;
  for (const auto& r : replicates) q0_sum += r.q0;
  report.mean_realized_q0 = replicates.empty() ? 0.0 : q0_sum / static_cast<double>(replicates.size());

  const double beta = std::log(truth.true_or);
  const double beta_star = std::log(truth.true_relative_or);
  for (const auto method : config.methods) {
    MethodSummary s;
    s.method = method;
    s.interval_method = std::string(interval_method_name(ipw_variant_of(method) && config.bootstrap_b > 0
                                                             ? IntervalMethod::percentile_bootstrap
                                                         : ipw_variant_of(method) ? IntervalMethod::none
                                                                                  : IntervalMethod::wald));
    std::vector<double> values;
    std::size_t covered = 0;
    std::size_t covered_star = 0;
    for (const auto& r : replicates) {
      const auto it = std::find_if(r.outcomes.begin(), r.outcomes.end(),
                                   [&](const MethodOutcome& o) { return o.method == method; });
      if (it == r.outcomes.end() || !it->ok()) {
        ++s.failures;
        continue;
      }
      const Estimate& e = *it->estimate;
      values.push_back(e.log_or);
      if (e.interval && e.interval->contains(beta)) ++covered;
      if (e.interval && e.interval->contains(beta_star)) ++covered_star;
    }
    s.n_ok = values.size();
    if (s.n_ok == 0) {
      throw EstimationError(std::string(analysis_method_name(method)),
                            fmt::format("all {} replicates failed", replicates.size()));
    }
    double sum = 0.0;
    for (const double v : values) sum += v;
    s.mean_log_or = sum / static_cast<double>(s.n_ok);
    s.mean_est = std::exp(s.mean_log_or);
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean_log_or) * (v - s.mean_log_or);
    s.mc_se = s.n_ok > 1 ? std::sqrt(ss / static_cast<double>(s.n_ok - 1)) : 0.0;
    s.coverage_beta = 100.0 * static_cast<double>(covered) / static_cast<double>(s.n_ok);
    s.coverage_beta_star = 100.0 * static_cast<double>(covered_star) / static_cast<double>(s.n_ok);
    report.methods.push_back(std::move(s));
  }
  report.replicates = std::move(replicates);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Truth truth = compute_truth(config);
  std::optional<Population> fixed;
  if (config.fixed_population) {
    fixed = generate_population(config.scenario, config.population_size,
                                derive_seed(config.base_seed, {stream_id(Stream::population)}), config.threads);
  }
  std::vector<ReplicateResult> results(config.replicates);
  parallel_for(config.replicates, config.threads, [&](std::size_t i) {
    results[i] = run_replicate(config, i, fixed ? &*fixed : nullptr);
  });
  return aggregate(config, truth, std::move(results));
}

std::string render_table(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  const Truth& t = report.truth;
  std::string out;
  out += fmt::format("Scenario {} ({} profile): {} replicates, population {}, {} tested / {} controls, B = {}\n",
                     c.scenario.id, profile_name(c.profile), c.replicates, c.population_size, c.n_tested,
                     c.n_controls, c.bootstrap_b);
  out += fmt::format("True OR exp(beta)            = {:.2f}{}\n", t.true_or,
                     t.non_collapsible ? " (exact enumeration)" : "");
  out += fmt::format("True relative OR exp(beta*)  = {:.2f} (exact {:.2f})\n", t.true_relative_or,
                     t.exact_relative_or);
  out += fmt::format("Testing prevalence q0        = {:.4f} (target {:.4f})\n", report.mean_realized_q0,
                     t.target_q0);
  out += fmt::format("{:<26}{:>10}{:>8}{:>12}{:>13}{:>10}  {}\n", "Method", "Mean est", "MC SE", "% Cov beta",
                     "% Cov beta*", "Failures", "Interval");
  for (const auto& s : report.methods) {
    // Without intervals there is no coverage to show.
    const bool has_intervals = s.interval_method != interval_method_name(IntervalMethod::none);
    const auto pct = [has_intervals](double v) { return has_intervals ? std::to_string(std::lround(v)) : "-"; };
    out += fmt::format("{:<26}{:>10.2f}{:>8.2f}{:>12}{:>13}{:>10}  {}\n", analysis_method_name(s.method), s.mean_est,
                       s.mc_se, pct(s.coverage_beta), pct(s.coverage_beta_star), s.failures, s.interval_method);
  }
  return out;
}

std::string render_key_values(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  std::string out;
  auto kv = [&out](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
  kv("config.scenario.id", std::to_string(c.scenario.id));
  ScenarioSpec spec = c.scenario;
  for (const auto& [name, ptr] : scenario_fields(spec)) kv("config.scenario." + name, fmt_double(*ptr));
  kv("config.profile", std::string(profile_name(c.profile)));
  kv("config.population_size", std::to_string(c.population_size));
  kv("config.n_tested", std::to_string(c.n_tested));
  kv("config.n_controls", std::to_string(c.n_controls));
  kv("config.replicates", std::to_string(c.replicates));
  kv("config.bootstrap_b", std::to_string(c.bootstrap_b));
  kv("config.ci_level", fmt_double(c.ci_level));
  std::string methods;
  for (const auto m : c.methods) methods += (methods.empty() ? "" : ",") + std::string(analysis_method_name(m));
  kv("config.methods", methods);
  kv("config.base_seed", std::to_string(c.base_seed));
  kv("config.fixed_population", c.fixed_population ? "true" : "false");
  kv("config.truth_population_size", std::to_string(c.truth_population_size));
  kv("config.q0", c.q0_override ? fmt_double(*c.q0_override) : "realized");
  kv("meta.interval.non_ipw", "wald");
  kv("meta.interval.ipw", c.bootstrap_b > 0 ? "percentile-bootstrap" : "none");
  kv("meta.coverage", "percent of successful replicates whose interval contains the target; both targets for every method");
  kv("meta.misspecified_testing_interaction", "w:x");
  kv("truth.true_or", fmt_double(report.truth.true_or));
  kv("truth.non_collapsible", report.truth.non_collapsible ? "true" : "false");
  kv("truth.true_relative_or", fmt_double(report.truth.true_relative_or));
  kv("truth.exact_relative_or", fmt_double(report.truth.exact_relative_or));
  kv("truth.target_q0", fmt_double(report.truth.target_q0));
  kv("truth.realized_q0", fmt_double(report.mean_realized_q0));
  for (const auto& s : report.methods) {
    const std::string p = "method." + std::string(analysis_method_name(s.method)) + ".";
    kv(p + "n_ok", std::to_string(s.n_ok));
    kv(p + "failures", std::to_string(s.failures));
    kv(p + "mean_log_or", fmt_double(s.mean_log_or));
    kv(p + "mean_est", fmt_double(s.mean_est));
    kv(p + "mc_se", fmt_double(s.mc_se));
    kv(p + "coverage_beta", fmt_double(s.coverage_beta));
    kv(p + "coverage_beta_star", fmt_double(s.coverage_beta_star));
    kv(p + "interval", s.interval_method);
  }
  return out;
}

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateResult>& replicates) {
  out << "replicate,method,status,log_or,ci_lower,ci_upper,interval_method,converged,positivity_floored,"
         "bootstrap_failures,n_tested,n_controls,n_tnd,q0,error\n";
  for (const auto& r : replicates) {
    for (const auto& o : r.outcomes) {
      out << r.replicate << ',' << analysis_method_name(o.method) << ',';
      if (o.ok()) {
        const Estimate& e = *o.estimate;
        out << "ok," << fmt_double(e.log_or) << ',';
        if (e.interval) {
          out << fmt_double(e.interval->lower) << ',' << fmt_double(e.interval->upper) << ',';
        } else {
          out << ",,";
        }
        out << interval_method_name(e.interval_method) << ',' << (e.converged ? 1 : 0) << ','
            << e.ipw.positivity_floored << ',' << e.bootstrap_failures << ',';
      } else {
        out << "failed,,,,none,0,0,0,";
      }
      out << r.n_tested << ',' << r.n_controls << ',' << r.n_tnd << ',' << fmt_double(r.q0) << ','
          << sanitize(o.error) << '\n';
    }
  }
}

std::vector<ReplicateResult> read_replicates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("replicates file is empty");
  const auto header = split(trim(line), ',');
  if (header.size() != 15 || header[0] != "replicate") throw ConfigError("unexpected replicates header");
  std::vector<ReplicateResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 15) throw ConfigError(fmt::format("replicates line {}: expected 15 fields", line_no));
    const std::size_t rep = parse_u64(f[0], "replicate");
    if (out.empty() || out.back().replicate != rep) {
      ReplicateResult r;
      r.replicate = rep;
      r.n_tested = parse_u64(f[10], "n_tested");
      r.n_controls = parse_u64(f[11], "n_controls");
      r.n_tnd = parse_u64(f[12], "n_tnd");
      r.q0 = parse_double(f[13], "q0");
      out.push_back(std::move(r));
    }
    MethodOutcome o;
    o.method = parse_analysis_method(f[1]);
    o.error = f[14];
    if (f[2] == "ok") {
      Estimate e;
      e.variant = ipw_variant_of(o.method);
      e.method = e.variant ? MethodTag::ipw
                 : o.method == AnalysisMethod::proper_tnd        ? MethodTag::proper_tnd
                 : o.method == AnalysisMethod::testpos_vs_controls ? MethodTag::testpos_vs_controls
                                                                   : MethodTag::tested_only;
      e.log_or = parse_double(f[3], "log_or");
      if (!f[4].empty()) e.interval = glm::Interval{parse_double(f[4], "ci_lower"), parse_double(f[5], "ci_upper")};
      for (const auto im : {IntervalMethod::none, IntervalMethod::wald, IntervalMethod::percentile_bootstrap}) {
        if (interval_method_name(im) == f[6]) e.interval_method = im;
      }
      e.converged = f[7] == "1";
      e.ipw.positivity_floored = parse_u64(f[8], "positivity_floored");
      e.bootstrap_failures = parse_u64(f[9], "bootstrap_failures");
      o.estimate = std::move(e);
    } else if (f[2] != "failed") {
      throw ConfigError(fmt::format("replicates line {}: unknown status '{}'", line_no, f[2]));
    }
    out.back().outcomes.push_back(std::move(o));
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("expected 'key = value', got '{}'", line));
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::pair<ExperimentConfig, Truth> config_and_truth_from_key_values(const std::map<std::string, std::string>& kv) {
  auto get = [&kv](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(fmt::format("summary is missing '{}'", key));
    return it->second;
  };
  ExperimentConfig c;
  c.scenario.id = static_cast<int>(parse_u64(get("config.scenario.id"), "config.scenario.id"));
  c.scenario.calibration.reset();
  for (auto& [name, ptr] : scenario_fields(c.scenario)) *ptr = parse_double(get("config.scenario." + name), name);
  c.profile = parse_profile(get("config.profile"));
  c.population_size = parse_u64(get("config.population_size"), "population_size");
  c.n_tested = parse_u64(get("config.n_tested"), "n_tested");
  c.n_controls = parse_u64(get("config.n_controls"), "n_controls");
  c.replicates = parse_u64(get("config.replicates"), "replicates");
  c.bootstrap_b = parse_u64(get("config.bootstrap_b"), "bootstrap_b");
  c.ci_level = parse_double(get("config.ci_level"), "ci_level");
  c.methods.clear();
  for (const auto& name : split(get("config.methods"), ',')) {
    if (!name.empty()) c.methods.push_back(parse_analysis_method(name));
  }
  c.base_seed = parse_u64(get("config.base_seed"), "base_seed");
  c.fixed_population = get("config.fixed_population") == "true";
  c.truth_population_size = parse_u64(get("config.truth_population_size"), "truth_population_size");
  if (const auto& q = get("config.q0"); q != "realized") c.q0_override = parse_double(q, "q0");

  Truth t;
  t.true_or = parse_double(get("truth.true_or"), "truth.true_or");
  t.non_collapsible = get("truth.non_collapsible") == "true";
  t.true_relative_or = parse_double(get("truth.true_relative_or"), "truth.true_relative_or");
  t.exact_relative_or = parse_double(get("truth.exact_relative_or"), "truth.exact_relative_or");
  t.target_q0 = parse_double(get("truth.target_q0"), "truth.target_q0");
  return {c, t};
}

}  // namespace tndipw
