#pragma once

#include "tndipw/glm.hpp"
#include "tndipw/records.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tndipw {

enum class MethodTag { proper_tnd, testpos_vs_controls, tested_only, ipw };

enum class IpwVariant { correct, missing_interaction, omitted_w, omit_hcsb, adjust_hcsb };

enum class IntervalMethod { none, wald, percentile_bootstrap };

std::string_view method_tag_name(MethodTag m) noexcept;
std::string_view ipw_variant_name(IpwVariant v) noexcept;
IpwVariant parse_ipw_variant(std::string_view name);
std::string_view interval_method_name(IntervalMethod m) noexcept;

struct IpwDiagnostics {
  bool infection_model_converged = false;
  bool testing_model_converged = false;
  bool outcome_model_converged = false;
  /// Tested records whose estimated testing probability was floored.
  std::size_t positivity_floored = 0;
};

struct Estimate {
  MethodTag method = MethodTag::tested_only;
  std::optional<IpwVariant> variant;
  /// X coefficient on the log-odds scale.
  double log_or = 0.0;
  std::vector<double> all_coefficients;
  std::vector<std::string> coefficient_labels;
  std::optional<glm::Interval> interval;
  IntervalMethod interval_method = IntervalMethod::none;
  /// Converged flag of the single fit for the logistic analyses.
  bool converged = false;
  IpwDiagnostics ipw;
  std::size_t bootstrap_failures = 0;

  double odds_ratio() const;
};

/// Nuisance model specifications for the weighted estimator.
struct IpwSpec {
  /// Infection among the tested, Pr(y1 = 1 | ..., T = 1).
  Formula numerator;
  /// Testing, fit on the whole case-control sample with case-control weights.
  Formula denominator;
  /// Overrides the sample's assumed testing prevalence.
  std::optional<double> q0;
  IpwVariant variant = IpwVariant::correct;

  static IpwSpec for_variant(IpwVariant variant, std::optional<double> q0 = std::nullopt);
};

inline constexpr double kPositivityFloor = 1e-6;

/// y1 ~ 1 + x + c over the tested records, Wald interval.
Estimate estimate_tested_only(const StudySample& sample, double level = 0.95);
/// y1 ~ 1 + x + c over tested symptomatic records, Wald interval.
Estimate estimate_proper_tnd(const StudySample& sample, double level = 0.95);
/// Group membership (symptomatic test-positive = 1, untested control = 0) on
/// 1 + x + c, Wald interval.
Estimate estimate_testpos_vs_controls(const StudySample& sample, double level = 0.95);

/// q0 for each tested record and (1 - q0) / J for each untested one, where J
/// is the number of controls per tested record.
std::vector<double> case_control_weights(const StudySample& sample, double q0);

/// All intermediate quantities of one weighted fit.
struct IpwFit {
  StudySample tested;
  glm::FitResult infection_model;
  glm::FitResult testing_model;
  glm::FitResult outcome_model;
  /// Fitted infection probability for each tested record (the fractional response).
  std::vector<double> q_hat;
  /// Floored estimated testing probability for each tested record.
  std::vector<double> p_hat;
  std::vector<double> weights;
  glm::DesignMatrix outcome_design;
  std::size_t positivity_floored = 0;
  double q0 = 0.0;
};

/// Three stages: infection model on the tested, weighted testing model on the
/// whole sample, then the fractional-response logistic fit on the tested with
/// weights 1 / P-hat and design (1, x, c). Throws EstimationError naming the stage.
IpwFit fit_ipw(const StudySample& sample, const IpwSpec& spec);
Estimate estimate_ipw(const StudySample& sample, const IpwSpec& spec);

/// Type-7 sample quantile (linear interpolation between order statistics
/// at h = (n - 1) p), the default of R's quantile().
double quantile_type7(std::vector<double> values, double p);

struct BootstrapInterval {
  glm::Interval interval;
  std::size_t replicates_ok = 0;
  std::size_t replicates_failed = 0;
  std::vector<double> estimates;
};

/// Percentile interval of B case-control bootstrap estimates: the (1 - level)/2
/// and (1 + level)/2 type-7 quantiles. Replicate b uses
/// derive_seed(seed, {bootstrap, b}); failed replicates are dropped and
/// counted. Throws EstimationError when more than 10% fail.
BootstrapInterval bootstrap_ci(const StudySample& sample, const IpwSpec& spec, std::size_t replicates, double level,
                               std::uint64_t seed, std::size_t threads = 1);

/// Percentile interval from precomputed replicate estimates.
glm::Interval percentile_interval(const std::vector<double>& estimates, double level);

}  // namespace tndipw
