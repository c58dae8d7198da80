#pragma once

#include "tndipw/records.hpp"
#include "tndipw/scenario.hpp"

#include <functional>
#include <vector>

namespace tndipw {

struct WeightedCell {
  IndividualRecord record;
  double probability = 0.0;

  int value(Variable v) const noexcept { return record.value(v); }
};

/// Exact joint distribution of every binary variable of a scenario, one cell
/// per configuration with nonzero probability.
class JointDistribution {
 public:
  explicit JointDistribution(const ScenarioSpec& spec);

  const std::vector<WeightedCell>& cells() const noexcept { return cells_; }
  const ScenarioSpec& spec() const noexcept { return spec_; }

  double probability(const std::function<bool(const IndividualRecord&)>& event) const;
  double mean(Variable v) const;
  /// Pr(A | B); returns 0 when Pr(B) = 0.
  double conditional(const std::function<bool(const IndividualRecord&)>& event,
                     const std::function<bool(const IndividualRecord&)>& given) const;

 private:
  ScenarioSpec spec_;
  std::vector<WeightedCell> cells_;
};

/// Probability-weighted logistic fit of `formula` over the cells accepted by
/// `keep`; the population limit of the corresponding sample ML fit.
/// `weight` multiplies each cell probability (defaults to 1).
glm::FitResult fit_on_cells(const JointDistribution& joint, const Formula& formula,
                            const std::function<bool(const IndividualRecord&)>& keep,
                            const std::function<double(const IndividualRecord&)>& weight = {});

/// X coefficient of y1 ~ 1 + x + c over the whole population.
double exact_prospective_log_or(const JointDistribution& joint);
/// X coefficient of y1 ~ 1 + x + c among the symptomatic.
double exact_relative_log_or(const JointDistribution& joint);

/// Exact-enumeration IPW solve: Q = Pr(y1 = 1 | cond, T = 1) and
/// P = Pr(T = 1 | cond) are computed as ratios of cell sums (cond is
/// (x, c, w), plus h when `condition_on_h`), then the weighted score
///   sum over tested cells of Pr(cell) (x, c)' (Q - expit(b0 + bx x + bc c)) / P = 0
/// is solved. Returns the fit; the x coefficient is at index 1.
glm::FitResult exact_ipw_fit(const JointDistribution& joint, bool condition_on_h);

}  // namespace tndipw
