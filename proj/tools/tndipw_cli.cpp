// Command-line front end: simulate, estimate, experiment, report.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 estimation failure.

#include "tndipw/config.hpp"
#include "tndipw/csv.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/harness.hpp"
#include "tndipw/rng.hpp"
#include "tndipw/sampling.hpp"
#include "tndipw/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace tndipw;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitEstimation = 2;

struct CommonOptions {
  std::optional<int> scenario;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> population;
  std::optional<std::size_t> n_tested;
  std::optional<std::size_t> n_controls;
  std::optional<std::size_t> bootstrap_b;
  std::optional<std::string> profile;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  bool fixed_population = false;
  std::optional<double> q0;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--scenario", o.scenario, "Scenario preset")->check(CLI::IsMember({1, 2, 3}));
  app->add_option("--config", o.config, "Config file (YAML)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Base RNG seed");
  app->add_option("--replicates", o.replicates, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  app->add_option("--population", o.population, "Population size")->check(CLI::PositiveNumber);
  app->add_option("--n-tested", o.n_tested, "Tested records per sample")->check(CLI::PositiveNumber);
  app->add_option("--n-controls", o.n_controls, "Untested controls per sample")->check(CLI::PositiveNumber);
  app->add_option("--bootstrap-b", o.bootstrap_b, "Bootstrap replicates for IPW intervals (0 = none)");
  app->add_option("--profile", o.profile, "Size preset")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app->add_option("--out-dir", o.out_dir, "Output directory");
  app->add_flag("--fixed-population", o.fixed_population, "Reuse one population for every replicate");
  app->add_option("--q0", o.q0, "Assumed testing prevalence (default: realized)");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig rc;
  if (o.config) {
    if (o.scenario || o.profile) {
      throw ConfigError("--scenario and --profile select presets; set them inside the config file instead");
    }
    rc = load_run_config(*o.config);
  } else {
    rc.experiment = profile_config(o.profile ? parse_profile(*o.profile) : Profile::desk, o.scenario.value_or(1));
  }
  ExperimentConfig& e = rc.experiment;
  if (o.seed) e.base_seed = *o.seed;
  if (o.replicates) e.replicates = *o.replicates;
  if (o.population) e.population_size = *o.population;
  if (o.n_tested) e.n_tested = *o.n_tested;
  if (o.n_controls) e.n_controls = *o.n_controls;
  if (o.bootstrap_b) e.bootstrap_b = *o.bootstrap_b;
  if (o.threads) e.threads = *o.threads;
  if (o.fixed_population) e.fixed_population = true;
  if (o.q0) e.q0_override = *o.q0;
  if (o.out_dir) rc.out_dir = fs::path(*o.out_dir);
  e.validate();
  return rc;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_simulate(const CommonOptions& o) {
  const RunConfig rc = resolve(o);
  const ExperimentConfig& e = rc.experiment;
  const Population pop = generate_population(e.scenario, e.population_size,
                                             derive_seed(e.base_seed, {stream_id(Stream::population), 0}), e.threads);
  if (rc.out_dir) {
    fs::create_directories(*rc.out_dir);
    csv::save_records(*rc.out_dir / "population.csv", pop.records);
    std::cerr << fmt::format("wrote {} records to {}\n", pop.size(), (*rc.out_dir / "population.csv").string());
    // The case-control sample that `estimate` draws for replicate 0, with
    // untested outcomes masked.
    // Requests are capped at what the population holds, as in run_replicate.
    const std::size_t tested = static_cast<std::size_t>(
        std::count_if(pop.records.begin(), pop.records.end(), [](const IndividualRecord& r) { return r.t == 1; }));
    const StudySample sample = sample_case_control(
        pop, std::min(e.n_tested, tested), std::min(e.n_controls, pop.size() - tested), derive_seed(e.base_seed, {stream_id(Stream::case_control_sample), 0}));
    csv::save_sample(*rc.out_dir / "sample.csv", sample);
    std::cerr << fmt::format("wrote {} tested and {} control records to {} (q0 = {:.17g})\n", sample.n_tested,
                             sample.n_controls, (*rc.out_dir / "sample.csv").string(), sample.q0_assumed);
  } else {
    csv::write_records(std::cout, pop.records);
  }
  return 0;
}

void print_estimate(const Estimate& e, std::string_view method, const StudySample& sample) {
  fmt::print("method = {}\n", method);
  fmt::print("design = {}\n", design_tag_name(sample.design));
  fmt::print("n_tested = {}\nn_controls = {}\nq0 = {:.17g}\n", sample.n_tested, sample.n_controls, sample.q0_assumed);
  fmt::print("log_or = {:.17g}\nodds_ratio = {:.6f}\n", e.log_or, e.odds_ratio());
  if (e.interval) {
    fmt::print("ci_lower = {:.17g}\nci_upper = {:.17g}\n", e.interval->lower, e.interval->upper);
  }
  fmt::print("interval_method = {}\nconverged = {}\n", interval_method_name(e.interval_method), e.converged);
  if (e.variant) {
    fmt::print("positivity_floored = {}\nbootstrap_failures = {}\n", e.ipw.positivity_floored, e.bootstrap_failures);
  }
  for (std::size_t i = 0; i < e.all_coefficients.size(); ++i) {
    fmt::print("coef.{} = {:.17g}\n", e.coefficient_labels[i], e.all_coefficients[i]);
  }
}

int cmd_estimate(const CommonOptions& o, const std::string& method_name, const std::optional<std::string>& sample_path) {
  const RunConfig rc = resolve(o);
  ExperimentConfig e = rc.experiment;
  const AnalysisMethod method = parse_analysis_method(method_name);
  e.methods = {method};
  e.validate();
  if (sample_path) {
    if (!e.q0_override && ipw_variant_of(method)) throw ConfigError("--q0 is required with --sample for IPW methods");
    const StudySample sample = csv::load_sample(*sample_path, e.q0_override.value_or(0.0));
    Estimate est;
    if (method == AnalysisMethod::proper_tnd) {
      est = estimate_proper_tnd(sample, e.ci_level);
    } else if (method == AnalysisMethod::testpos_vs_controls) {
      est = estimate_testpos_vs_controls(sample, e.ci_level);
    } else if (method == AnalysisMethod::tested_only) {
      est = estimate_tested_only(sample, e.ci_level);
    } else {
      const IpwSpec spec = IpwSpec::for_variant(*ipw_variant_of(method), e.q0_override);
      est = estimate_ipw(sample, spec);
      if (e.bootstrap_b > 0) {
        const auto boot = bootstrap_ci(sample, spec, e.bootstrap_b, e.ci_level,
                                       derive_seed(e.base_seed, {stream_id(Stream::bootstrap), 0}), e.threads);
        est.interval = boot.interval;
        est.interval_method = IntervalMethod::percentile_bootstrap;
        est.bootstrap_failures = boot.replicates_failed;
      }
    }
    print_estimate(est, method_name, sample);
    return 0;
  }
  const ReplicateResult r = run_replicate(e, 0, nullptr, e.threads);
  const MethodOutcome& outcome = r.outcomes.front();
  if (!outcome.ok()) {
    std::cerr << "estimation failed: " << outcome.error << "\n";
    return kExitEstimation;
  }
  StudySample shape;
  shape.design = method == AnalysisMethod::proper_tnd ? DesignTag::proper_tnd : DesignTag::all_tested_plus_controls;
  shape.n_tested = method == AnalysisMethod::proper_tnd ? r.n_tnd : r.n_tested;
  shape.n_controls = method == AnalysisMethod::proper_tnd ? 0 : r.n_controls;
  shape.q0_assumed = r.q0;
  print_estimate(*outcome.estimate, method_name, shape);
  return 0;
}

int cmd_experiment(const CommonOptions& o) {
  const RunConfig rc = resolve(o);
  const ExperimentReport report = run_experiment(rc.experiment);
  const std::string table = render_table(report);
  std::cout << table;
  if (rc.out_dir) {
    fs::create_directories(*rc.out_dir);
    std::ofstream csv_out(*rc.out_dir / "replicates.csv");
    if (!csv_out) throw Error("cannot write replicates.csv");
    write_replicates_csv(csv_out, report.replicates);
    write_file(*rc.out_dir / "summary.txt", table);
    write_file(*rc.out_dir / "summary.kv", render_key_values(report));
    RunConfig echo = rc;
    echo.out_dir.reset();
    write_file(*rc.out_dir / "config.yaml", emit_run_config(echo));
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  const fs::path root(dir);
  std::istringstream kv_text(read_file(root / "summary.kv"));
  const auto [config, truth] = config_and_truth_from_key_values(parse_key_values(kv_text));
  std::istringstream csv_text(read_file(root / "replicates.csv"));
  const ExperimentReport report = aggregate(config, truth, read_replicates_csv(csv_text));
  std::cout << render_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Study-design comparison for SARS-CoV-2 risk factors: simulation, IPW and TND analyses"};
  app.require_subcommand(1);

  CommonOptions sim_opts, est_opts, exp_opts;
  auto* simulate = app.add_subcommand("simulate", "Write one simulated population as CSV (and, with --out-dir, its case-control sample)");
  add_common(simulate, sim_opts);

  auto* estimate = app.add_subcommand("estimate", "Draw one sample (or read one) and run one method");
  add_common(estimate, est_opts);
  std::string method = "ipw-correct";
  std::optional<std::string> sample_path;
  estimate->add_option("--method", method, "Analysis method")
      ->check(CLI::IsMember({"proper-tnd", "testpos-vs-controls", "tested-only", "ipw-correct",
                             "ipw-missing-interaction", "ipw-omitted-w", "ipw-omit-hcsb", "ipw-adjust-hcsb"}));
  estimate->add_option("--sample", sample_path, "Sample CSV to analyse instead of simulating")
      ->check(CLI::ExistingFile);

  auto* experiment = app.add_subcommand("experiment", "Run the Monte Carlo comparison");
  add_common(experiment, exp_opts);

  auto* report = app.add_subcommand("report", "Re-render the table from a finished experiment directory");
  std::string report_dir;
  report->add_option("--out-dir", report_dir, "Directory holding replicates.csv and summary.kv")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts);
    if (*estimate) return cmd_estimate(est_opts, method, sample_path);
    if (*experiment) return cmd_experiment(exp_opts);
    if (*report) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return kExitEstimation;
  }
  return kExitUsage;
}
