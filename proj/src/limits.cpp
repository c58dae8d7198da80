#include "tndipw/limits.hpp"

#include <algorithm>

namespace tndipw {

namespace {

const Formula& outcome_formula() {
  static const Formula f = Formula::parse("y1 ~ x + c");
  return f;
}

bool any(const IndividualRecord&) { return true; }

}  // namespace

double limit_tested_only(const JointDistribution& joint) {
  return fit_on_cells(joint, outcome_formula(), [](const IndividualRecord& r) { return r.t == 1; }).coefficient("x");
}

double limit_proper_tnd(const JointDistribution& joint) {
  return fit_on_cells(joint, outcome_formula(), [](const IndividualRecord& r) {
           return r.t == 1 && r.w == 1;
         }).coefficient("x");
}

double limit_testpos_vs_controls(const JointDistribution& joint) {
  static const Formula group = Formula::parse("t ~ x + c");
  return fit_on_cells(joint, group, [](const IndividualRecord& r) {
           return r.t == 0 || (r.w == 1 && r.y1 == 1);
         }).coefficient("x");
}

double limit_ipw(const JointDistribution& joint, const IpwSpec& spec) {
  const auto infection = fit_on_cells(joint, spec.numerator, [](const IndividualRecord& r) { return r.t == 1; });
  const auto testing = fit_on_cells(joint, spec.denominator, any);

  std::vector<WeightedCell> tested;
  for (const auto& cell : joint.cells()) {
    if (cell.record.t == 1) tested.push_back(cell);
  }
  const std::span<const WeightedCell> cells(tested);
  const auto q_hat = glm::predict(infection, build_regressors(cells, spec.numerator));
  const auto p_hat = glm::predict(testing, build_regressors(cells, spec.denominator));
  std::vector<double> weights(tested.size());
  for (std::size_t i = 0; i < tested.size(); ++i) {
    weights[i] = tested[i].probability / std::max(p_hat[i], kPositivityFloor);
  }
  const auto design = build_regressors(cells, outcome_formula());
  return glm::fit_weighted_logistic(design, q_hat, weights).coefficient("x");
}

}  // namespace tndipw
