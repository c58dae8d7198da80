#include "tndipw/estimators.hpp"

#include "tndipw/errors.hpp"
#include "tndipw/parallel.hpp"
#include "tndipw/rng.hpp"
#include "tndipw/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tndipw {

namespace {

const Formula& outcome_formula() {
  static const Formula f = Formula::parse("y1 ~ x + c");
  return f;
}

Estimate logistic_estimate(MethodTag method, const StudySample& subset_sample, const Formula& formula, double level) {
  if (subset_sample.records.empty()) {
    throw EstimationError(std::string(method_tag_name(method)), "analysis subset is empty");
  }
  const ModelFrame frame = build_design(subset_sample, formula);
  const glm::FitResult fit = glm::fit_logistic(frame.design, frame.response);
  Estimate e;
  e.method = method;
  const std::size_t ix = frame.design.column_index("x");
  e.log_or = fit.coefficients[static_cast<Eigen::Index>(ix)];
  e.all_coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  e.coefficient_labels = fit.column_labels;
  e.converged = fit.converged;
  if (fit.converged) {
    e.interval = glm::wald_interval(fit, ix, level);
    e.interval_method = IntervalMethod::wald;
  }
  return e;
}

template <class Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const EstimationError&) {
    throw;
  } catch (const Error& e) {
    throw EstimationError(stage, e.what());
  }
}

}  // namespace

std::string_view method_tag_name(MethodTag m) noexcept {
  switch (m) {
    case MethodTag::proper_tnd: return "proper-tnd";
    case MethodTag::testpos_vs_controls: return "testpos-vs-controls";
    case MethodTag::tested_only: return "tested-only";
    case MethodTag::ipw: return "ipw";
  }
  return "?";
}

std::string_view ipw_variant_name(IpwVariant v) noexcept {
  switch (v) {
    case IpwVariant::correct: return "correct";
    case IpwVariant::missing_interaction: return "missing-interaction";
    case IpwVariant::omitted_w: return "omitted-w";
    case IpwVariant::omit_hcsb: return "omit-hcsb";
    case IpwVariant::adjust_hcsb: return "adjust-hcsb";
  }
  return "?";
}

IpwVariant parse_ipw_variant(std::string_view name) {
  for (const auto v : {IpwVariant::correct, IpwVariant::missing_interaction, IpwVariant::omitted_w,
                       IpwVariant::omit_hcsb, IpwVariant::adjust_hcsb}) {
    if (ipw_variant_name(v) == name) return v;
  }
  throw ConfigError(fmt::format("unknown IPW variant '{}'", name));
}

std::string_view interval_method_name(IntervalMethod m) noexcept {
  switch (m) {
    case IntervalMethod::none: return "none";
    case IntervalMethod::wald: return "wald";
    case IntervalMethod::percentile_bootstrap: return "percentile-bootstrap";
  }
  return "?";
}

double Estimate::odds_ratio() const { return std::exp(log_or); }

IpwSpec IpwSpec::for_variant(IpwVariant variant, std::optional<double> q0) {
  IpwSpec s;
  s.variant = variant;
  s.q0 = q0;
  switch (variant) {
    case IpwVariant::correct:
    case IpwVariant::omit_hcsb:
      s.numerator = Formula::parse("y1 ~ x + c + w + w:x");
      s.denominator = Formula::parse("t ~ w + x + c + w:x");
      break;
    case IpwVariant::missing_interaction:
      s.numerator = Formula::parse("y1 ~ x + c + w + w:x");
      s.denominator = Formula::parse("t ~ w + x + c");
      break;
    case IpwVariant::omitted_w:
      s.numerator = Formula::parse("y1 ~ x + c");
      s.denominator = Formula::parse("t ~ x + c");
      break;
    case IpwVariant::adjust_hcsb:
      s.numerator = Formula::parse("y1 ~ x + c + w + w:x + h");
      s.denominator = Formula::parse("t ~ w + x + c + w:x + h + x:h");
      break;
  }
  return s;
}

Estimate estimate_tested_only(const StudySample& sample, double level) {
  return logistic_estimate(MethodTag::tested_only, subset(sample, tested_filter()), outcome_formula(), level);
}

Estimate estimate_proper_tnd(const StudySample& sample, double level) {
  return logistic_estimate(MethodTag::proper_tnd, subset(sample, tested_symptomatic_filter()), outcome_formula(),
                           level);
}

Estimate estimate_testpos_vs_controls(const StudySample& sample, double level) {
  static const Formula group = Formula::parse("t ~ x + c");
  const StudySample analysis = subset(sample, testpos_or_control_filter());
  if (analysis.n_tested == 0 || analysis.n_controls == 0) {
    throw EstimationError("testpos-vs-controls", "needs symptomatic test-positives and untested controls");
  }
  return logistic_estimate(MethodTag::testpos_vs_controls, analysis, group, level);
}

std::vector<double> case_control_weights(const StudySample& sample, double q0) {
  if (!(q0 > 0.0 && q0 < 1.0)) throw EstimationError("case-control weights", fmt::format("q0 = {} not in (0, 1)", q0));
  if (sample.n_tested == 0 || sample.n_controls == 0) {
    throw InsufficientStratumError("case-control weights need at least one tested and one untested record");
  }
  const double j = static_cast<double>(sample.n_controls) / static_cast<double>(sample.n_tested);
  const double control_weight = (1.0 - q0) / j;
  std::vector<double> w;
  w.reserve(sample.records.size());
  for (const auto& r : sample.records) w.push_back(r.tested() ? q0 : control_weight);
  return w;
}

IpwFit fit_ipw(const StudySample& sample, const IpwSpec& spec) {
  IpwFit out;
  out.q0 = spec.q0.value_or(sample.q0_assumed);
  out.tested = subset(sample, tested_filter());
  if (out.tested.records.empty()) throw EstimationError("infection model", "no tested records");

  out.infection_model = run_stage("infection model", [&] {
    const ModelFrame frame = build_design(out.tested, spec.numerator);
    return glm::fit_logistic(frame.design, frame.response);
  });

  out.testing_model = run_stage("testing model", [&] {
    const auto weights = case_control_weights(sample, out.q0);
    const ModelFrame frame = build_design(sample, spec.denominator);
    return glm::fit_weighted_logistic(frame.design, frame.response, weights);
  });

  out.outcome_model = run_stage("weighted outcome model", [&] {
    out.q_hat = glm::predict(out.infection_model, build_regressors(out.tested, spec.numerator));
    out.p_hat = glm::predict(out.testing_model, build_regressors(out.tested, spec.denominator));
    out.weights.resize(out.p_hat.size());
    for (std::size_t i = 0; i < out.p_hat.size(); ++i) {
      if (out.p_hat[i] < kPositivityFloor) {
        out.p_hat[i] = kPositivityFloor;
        ++out.positivity_floored;
      }
      out.weights[i] = 1.0 / out.p_hat[i];
    }
    out.outcome_design = build_regressors(out.tested, outcome_formula());
    return glm::fit_weighted_logistic(out.outcome_design, out.q_hat, out.weights);
  });
  return out;
}

Estimate estimate_ipw(const StudySample& sample, const IpwSpec& spec) {
  const IpwFit fit = fit_ipw(sample, spec);
  Estimate e;
  e.method = MethodTag::ipw;
  e.variant = spec.variant;
  e.log_or = fit.outcome_model.coefficient("x");
  const auto& b = fit.outcome_model.coefficients;
  e.all_coefficients.assign(b.data(), b.data() + b.size());
  e.coefficient_labels = fit.outcome_model.column_labels;
  e.converged = fit.outcome_model.converged;
  e.ipw = {fit.infection_model.converged, fit.testing_model.converged, fit.outcome_model.converged,
           fit.positivity_floored};
  return e;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw Error("quantile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(fmt::format("quantile probability {} not in [0, 1]", p));
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

glm::Interval percentile_interval(const std::vector<double>& estimates, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(fmt::format("level {} not in (0, 1)", level));
  return {quantile_type7(estimates, (1.0 - level) / 2.0), quantile_type7(estimates, (1.0 + level) / 2.0)};
}

BootstrapInterval bootstrap_ci(const StudySample& sample, const IpwSpec& spec, std::size_t replicates, double level,
                               std::uint64_t seed, std::size_t threads) {
  if (replicates < 2) throw Error("bootstrap needs at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw Error(fmt::format("level {} not in (0, 1)", level));
  // q0 stays fixed at the original sample's value across replicates.
  IpwSpec fixed = spec;
  fixed.q0 = spec.q0.value_or(sample.q0_assumed);

  std::vector<std::optional<double>> results(replicates);
  parallel_for(replicates, threads, [&](std::size_t b) {
    const StudySample resampled = bootstrap_resample(sample, derive_seed(seed, {stream_id(Stream::bootstrap), b}));
    try {
      results[b] = estimate_ipw(resampled, fixed).log_or;
    } catch (const Error&) {
      results[b] = std::nullopt;
    }
  });

  BootstrapInterval out;
  for (const auto& r : results) {
    if (r) {
      out.estimates.push_back(*r);
    } else {
      ++out.replicates_failed;
    }
  }
  out.replicates_ok = out.estimates.size();
  if (out.replicates_failed * 10 > replicates) {
    throw EstimationError("bootstrap", fmt::format("{} of {} replicates failed", out.replicates_failed, replicates));
  }
  out.interval = percentile_interval(out.estimates, level);
  return out;
}

}  // namespace tndipw
