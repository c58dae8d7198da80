#pragma once

#include "tndipw/estimators.hpp"
#include "tndipw/scenario.hpp"
#include "tndipw/simulator.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tndipw {

/// One analysis in the comparison table.
enum class AnalysisMethod {
  proper_tnd,
  testpos_vs_controls,
  tested_only,
  ipw_correct,
  ipw_missing_interaction,
  ipw_omitted_w,
  ipw_omit_hcsb,
  ipw_adjust_hcsb,
};

std::string_view analysis_method_name(AnalysisMethod m) noexcept;
AnalysisMethod parse_analysis_method(std::string_view name);
std::optional<IpwVariant> ipw_variant_of(AnalysisMethod m) noexcept;
/// Every method reported for the given scenario, in table order.
std::vector<AnalysisMethod> default_methods(int scenario_id);

enum class Profile { desk, paper };
Profile parse_profile(std::string_view name);
std::string_view profile_name(Profile p) noexcept;

struct ExperimentConfig {
  ScenarioSpec scenario;
  Profile profile = Profile::desk;
  std::size_t population_size = 200'000;
  std::size_t n_tested = 400;
  std::size_t n_controls = 400;
  std::size_t replicates = 300;
  std::size_t bootstrap_b = 200;
  double ci_level = 0.95;
  std::vector<AnalysisMethod> methods;
  std::uint64_t base_seed = 20201;
  /// 0 = one per hardware thread.
  std::size_t threads = 0;
  /// Reuse one population for every replicate instead of regenerating.
  bool fixed_population = false;
  /// Size of the dedicated population behind the relative-OR truth.
  std::size_t truth_population_size = 1'000'000;
  /// Assumed testing prevalence for weighting; the realized one when empty.
  std::optional<double> q0_override;

  /// Throws ConfigError on an unusable configuration.
  void validate() const;
};

/// Named preset: desk = 200k / 400 / 400 / 300 replicates / B = 200,
/// paper = 1M / 2000 / 2000 / 1000 replicates / B = 500.
ExperimentConfig profile_config(Profile profile, int scenario_id);

struct MethodOutcome {
  AnalysisMethod method = AnalysisMethod::tested_only;
  std::optional<Estimate> estimate;
  std::string error;

  bool ok() const noexcept { return estimate.has_value(); }
};

struct ReplicateResult {
  std::size_t replicate = 0;
  /// Realized stratum sizes (requests are capped at what the population holds).
  std::size_t n_tested = 0;
  std::size_t n_controls = 0;
  std::size_t n_tnd = 0;
  double q0 = 0.0;
  std::vector<MethodOutcome> outcomes;
};

/// Seeds derive from (base_seed, replicate_index). `fixed` replaces the
/// per-replicate population when non-null. Method failures are recorded,
/// never thrown.
ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t replicate_index,
                              const Population* fixed = nullptr, std::size_t bootstrap_threads = 1);

struct Truth {
  double true_or = 1.0;
  bool non_collapsible = false;
  /// From the dedicated large population.
  double true_relative_or = 1.0;
  /// From the exact joint distribution, for reference.
  double exact_relative_or = 1.0;
  double target_q0 = 0.0;
};

Truth compute_truth(const ExperimentConfig& config);

struct MethodSummary {
  AnalysisMethod method = AnalysisMethod::tested_only;
  std::size_t n_ok = 0;
  std::size_t failures = 0;
  double mean_log_or = 0.0;
  /// exp(mean_log_or).
  double mean_est = 1.0;
  /// Standard deviation of log_or across successful replicates.
  double mc_se = 0.0;
  /// Percent of successful replicates whose interval holds log(true OR) / log(true relative OR).
  double coverage_beta = 0.0;
  double coverage_beta_star = 0.0;
  std::string interval_method;
};

struct ExperimentReport {
  ExperimentConfig config;
  Truth truth;
  double mean_realized_q0 = 0.0;
  std::vector<MethodSummary> methods;
  std::vector<ReplicateResult> replicates;

  const MethodSummary& summary(AnalysisMethod m) const;
};

/// Ordered fold over replicate results. Throws EstimationError when every
/// replicate of some method failed.
ExperimentReport aggregate(const ExperimentConfig& config, const Truth& truth,
                           std::vector<ReplicateResult> replicates);

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Fixed-width comparison table: Mean est (OR, 2 dp), MC SE (2 dp), % Cov
/// beta and % Cov beta* (integer percent).
std::string render_table(const ExperimentReport& report);
/// `key = value` lines: config echo, truth block and per-method statistics.
std::string render_key_values(const ExperimentReport& report);

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateResult>& replicates);
std::vector<ReplicateResult> read_replicates_csv(std::istream& in);

/// Parses `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in);
/// Restores the config and truth needed to re-aggregate saved replicates.
std::pair<ExperimentConfig, Truth> config_and_truth_from_key_values(const std::map<std::string, std::string>& kv);

}  // namespace tndipw
