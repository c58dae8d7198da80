#include "tndipw/scenario.hpp"

#include "tndipw/enumeration.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/glm.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>

namespace tndipw {

using glm::expit;

double prob_x(const ScenarioSpec& s, int c) noexcept { return s.p_x_given_c[c ? 1 : 0]; }

double prob_infection(const ScenarioSpec& s, int x, int c, int u, int h) noexcept {
  const auto& m = s.infection;
  return expit(m.intercept + m.x * x + m.c * c + m.u * u + m.h * h);
}

double prob_other_infection(const ScenarioSpec& s, int x, int c, int u) noexcept {
  const auto& m = s.other_infection;
  return expit(m.intercept + m.x * x + m.c * c + m.u * u);
}

double prob_symptoms(const ScenarioSpec& s, int y1, int y_other) noexcept {
  if (y1) return s.symptoms.given_infection;
  if (y_other) return s.symptoms.given_other;
  return s.symptoms.baseline;
}

double prob_tested(const ScenarioSpec& s, int w, int x, int c, int h) noexcept {
  const auto& m = s.testing;
  return expit(m.intercept + m.w * w + m.x * x + m.c * c + m.wx * w * x + m.h * h + m.xh * x * h);
}

void validate(const ScenarioSpec& spec) {
  auto probability = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpecError(fmt::format("{} = {} is not a probability", what, p));
  };
  auto finite = [](double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidSpecError(fmt::format("{} = {} is not finite", what, v));
  };
  probability(spec.p_c, "p_c");
  probability(spec.p_x_given_c[0], "p_x_given_c[0]");
  probability(spec.p_x_given_c[1], "p_x_given_c[1]");
  probability(spec.p_u, "p_u");
  probability(spec.p_h, "p_h");
  probability(spec.symptoms.baseline, "symptoms.baseline");
  probability(spec.symptoms.given_infection, "symptoms.given_infection");
  probability(spec.symptoms.given_other, "symptoms.given_other");
  const auto& i = spec.infection;
  for (double v : {i.intercept, i.x, i.c, i.u, i.h}) finite(v, "infection coefficient");
  const auto& o = spec.other_infection;
  for (double v : {o.intercept, o.x, o.c, o.u}) finite(v, "other_infection coefficient");
  const auto& t = spec.testing;
  for (double v : {t.intercept, t.w, t.x, t.c, t.wx, t.h, t.xh}) finite(v, "testing coefficient");
  if (spec.calibration) {
    const auto& c = *spec.calibration;
    for (double p : {c.infection_prevalence, c.other_infection_prevalence, c.testing_prevalence}) {
      if (!(p > 0.0 && p < 1.0)) throw InvalidSpecError(fmt::format("calibration target {} is not in (0, 1)", p));
    }
  }
}

void validate_scenario_invariants(const ScenarioSpec& spec) {
  validate(spec);
  const bool h_on_infection = spec.infection.h != 0.0;
  const bool h_on_testing = spec.testing.h != 0.0 || spec.testing.xh != 0.0;
  switch (spec.id) {
    case 1:
    case 2:
      if (spec.has_h() && (h_on_infection || h_on_testing)) {
        throw InvalidSpecError(fmt::format("scenario {} must not load the health-care-seeking variable", spec.id));
      }
      if (spec.id == 2 && spec.infection.x != spec.other_infection.x) {
        throw InvalidSpecError("scenario 2 needs equal x effects on SARS-CoV-2 and other infection");
      }
      break;
    case 3:
      if (!spec.has_h() || !h_on_infection || !h_on_testing) {
        throw InvalidSpecError("scenario 3 needs the health-care-seeking variable to load on infection and testing");
      }
      break;
    default:
      throw InvalidSpecError(fmt::format("unknown scenario id {}", spec.id));
  }
}

ScenarioSpec scenario_preset(int id) {
  if (id < 1 || id > 3) throw InvalidSpecError(fmt::format("unknown scenario id {}", id));
  ScenarioSpec s;
  s.id = id;
  s.p_c = 0.5;
  // A fairly rare exposure keeps every (symptoms, exposure) cell of the
  // tested stratum populated with infections at 400 tested records.
  s.p_x_given_c = {0.15, 0.35};
  s.p_u = 0.3;
  s.infection = {0.0, std::log(2.5), std::log(1.5), 0.0, 0.0};
  s.other_infection = {0.0, std::log(1.5), 0.0, 0.5};
  // Most infections are asymptomatic, so asymptomatic testing finds cases.
  s.symptoms = {0.01, 0.3, 0.6};
  // Symptomatic people are tested regardless of exposure (x + w:x = 0);
  // asymptomatic testing favours the exposed, which biases tested-only fits.
  s.testing = {0.0, 2.0, 1.0, 0.5, -1.0, 0.0, 0.0};
  s.calibration = CalibrationTargets{};
  if (id == 2) s.infection.x = s.other_infection.x;
  if (id == 3) {
    // Health-care seekers are more often infected, and the exposed among
    // them are tested more often: H opens a path between X and Y1 through T.
    s.p_h = 0.2;
    s.infection.h = 2.5;
    s.testing.xh = 1.5;
  }
  return s;
}

namespace {

// Root of a monotone increasing function of the intercept.
double solve_intercept(const std::function<double(double)>& prevalence_at, double target) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double value = prevalence_at(mid);
    if (std::abs(value - target) < 1e-12) return mid;
    (value < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScenarioSpec calibrate(ScenarioSpec spec, const CalibrationTargets& targets) {
  spec.calibration = targets;
  validate(spec);
  spec.infection.intercept = solve_intercept(
      [&](double b0) {
        ScenarioSpec trial = spec;
        trial.infection.intercept = b0;
        return JointDistribution(trial).mean(Variable::y1);
      },
      targets.infection_prevalence);
  spec.other_infection.intercept = solve_intercept(
      [&](double b0) {
        ScenarioSpec trial = spec;
        trial.other_infection.intercept = b0;
        return JointDistribution(trial).mean(Variable::y_other);
      },
      targets.other_infection_prevalence);
  spec.testing.intercept = solve_intercept(
      [&](double b0) {
        ScenarioSpec trial = spec;
        trial.testing.intercept = b0;
        return JointDistribution(trial).mean(Variable::t);
      },
      targets.testing_prevalence);
  return spec;
}

ScenarioSpec default_scenario(int id, std::optional<double> testing_prevalence) {
  ScenarioSpec preset = scenario_preset(id);
  CalibrationTargets targets = preset.calibration.value_or(CalibrationTargets{});
  if (testing_prevalence) targets.testing_prevalence = *testing_prevalence;
  return calibrate(preset, targets);
}

}  // namespace tndipw
