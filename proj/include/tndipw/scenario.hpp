#pragma once

#include <array>
#include <optional>

namespace tndipw {

/// Logit-scale coefficients for SARS-CoV-2 infection (y1).
struct InfectionModel {
  double intercept = 0.0;
  double x = 0.0;
  double c = 0.0;
  double u = 0.0;
  double h = 0.0;
};

/// Logit-scale coefficients for other infections.
struct OtherInfectionModel {
  double intercept = 0.0;
  double x = 0.0;
  double c = 0.0;
  double u = 0.0;
};

/// Pr(W = 1) by infection status. SARS-CoV-2 takes precedence: an infected
/// person has symptoms with probability `given_infection` regardless of
/// other infections.
struct SymptomModel {
  double baseline = 0.0;
  double given_infection = 0.0;
  double given_other = 0.0;
};

/// Logit-scale coefficients for being tested. Testing never reads y1.
struct TestingModel {
  double intercept = 0.0;
  double w = 0.0;
  double x = 0.0;
  double c = 0.0;
  double wx = 0.0;
  double h = 0.0;
  double xh = 0.0;
};

/// Prevalences the free intercepts are solved for.
struct CalibrationTargets {
  double infection_prevalence = 0.08;
  double other_infection_prevalence = 0.05;
  double testing_prevalence = 0.002;
};

/// Structural equations of one data-generating process.
struct ScenarioSpec {
  int id = 1;
  double p_c = 0.5;
  std::array<double, 2> p_x_given_c{0.5, 0.5};
  double p_u = 0.3;
  /// Zero when the scenario has no health-care-seeking variable.
  double p_h = 0.0;
  InfectionModel infection;
  OtherInfectionModel other_infection;
  SymptomModel symptoms;
  TestingModel testing;
  std::optional<CalibrationTargets> calibration;

  bool has_h() const noexcept { return p_h > 0.0; }
};

double prob_x(const ScenarioSpec& s, int c) noexcept;
double prob_infection(const ScenarioSpec& s, int x, int c, int u, int h) noexcept;
double prob_other_infection(const ScenarioSpec& s, int x, int c, int u) noexcept;
double prob_symptoms(const ScenarioSpec& s, int y1, int y_other) noexcept;
double prob_tested(const ScenarioSpec& s, int w, int x, int c, int h) noexcept;

/// Throws InvalidSpecError on probabilities outside [0, 1] or non-finite coefficients.
void validate(const ScenarioSpec& spec);

/// Checks the structural constraints tied to the three named scenarios.
void validate_scenario_invariants(const ScenarioSpec& spec);

/// Uncalibrated preset for scenario 1, 2 or 3.
ScenarioSpec scenario_preset(int id);

/// Solves the infection, other-infection and testing intercepts (in that
/// order) by bisection on the exact joint distribution.
ScenarioSpec calibrate(ScenarioSpec spec, const CalibrationTargets& targets);

/// Preset with its calibration applied; `testing_prevalence` overrides the preset's target.
ScenarioSpec default_scenario(int id, std::optional<double> testing_prevalence = std::nullopt);

}  // namespace tndipw
