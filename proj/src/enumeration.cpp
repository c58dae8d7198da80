#include "tndipw/enumeration.hpp"

#include <fmt/format.h>

#include <array>
#include <map>

namespace tndipw {

JointDistribution::JointDistribution(const ScenarioSpec& spec) : spec_(spec) {
  validate(spec_);
  const int h_levels = spec_.has_h() ? 2 : 1;
  auto bern = [](double p, int v) { return v ? p : 1.0 - p; };
  for (int c = 0; c < 2; ++c) {
    for (int x = 0; x < 2; ++x) {
      for (int u = 0; u < 2; ++u) {
        for (int h = 0; h < h_levels; ++h) {
          const double p_base = bern(spec_.p_c, c) * bern(prob_x(spec_, c), x) * bern(spec_.p_u, u) *
                                 (spec_.has_h() ? bern(spec_.p_h, h) : 1.0);
          for (int y1 = 0; y1 < 2; ++y1) {
            const double p_y1 = p_base * bern(prob_infection(spec_, x, c, u, h), y1);
            for (int yo = 0; yo < 2; ++yo) {
              const double p_yo = p_y1 * bern(prob_other_infection(spec_, x, c, u), yo);
              for (int w = 0; w < 2; ++w) {
                const double p_w = p_yo * bern(prob_symptoms(spec_, y1, yo), w);
                for (int t = 0; t < 2; ++t) {
                  const double p = p_w * bern(prob_tested(spec_, w, x, c, h), t);
                  if (p <= 0.0) continue;
                  IndividualRecord r;
                  r.c = static_cast<std::uint8_t>(c);
                  r.x = static_cast<std::uint8_t>(x);
                  r.u = static_cast<std::uint8_t>(u);
                  r.h = static_cast<std::uint8_t>(h);
                  r.y1 = static_cast<std::uint8_t>(y1);
                  r.y_other = static_cast<std::uint8_t>(yo);
                  r.w = static_cast<std::uint8_t>(w);
                  r.t = static_cast<std::uint8_t>(t);
                  cells_.push_back({r, p});
                }
              }
            }
          }
        }
      }
    }
  }
}

double JointDistribution::probability(const std::function<bool(const IndividualRecord&)>& event) const {
  double total = 0.0;
  for (const auto& cell : cells_) {
    if (event(cell.record)) total += cell.probability;
  }
  return total;
}

double JointDistribution::mean(Variable v) const {
  double total = 0.0;
  for (const auto& cell : cells_) total += cell.probability * cell.record.value(v);
  return total;
}

double JointDistribution::conditional(const std::function<bool(const IndividualRecord&)>& event,
                                      const std::function<bool(const IndividualRecord&)>& given) const {
  const double denom = probability(given);
  if (denom <= 0.0) return 0.0;
  return probability([&](const IndividualRecord& r) { return given(r) && event(r); }) / denom;
}

glm::FitResult fit_on_cells(const JointDistribution& joint, const Formula& formula,
                            const std::function<bool(const IndividualRecord&)>& keep,
                            const std::function<double(const IndividualRecord&)>& weight) {
  std::vector<WeightedCell> kept;
  std::vector<double> weights;
  for (const auto& cell : joint.cells()) {
    if (!keep(cell.record)) continue;
    kept.push_back(cell);
    weights.push_back(cell.probability * (weight ? weight(cell.record) : 1.0));
  }
  const ModelFrame frame = build_design(std::span<const WeightedCell>(kept), formula);
  return glm::fit_weighted_logistic(frame.design, frame.response, weights);
}

double exact_prospective_log_or(const JointDistribution& joint) {
  static const Formula f = Formula::parse("y1 ~ x + c");
  return fit_on_cells(joint, f, [](const IndividualRecord&) { return true; }).coefficient("x");
}

double exact_relative_log_or(const JointDistribution& joint) {
  static const Formula f = Formula::parse("y1 ~ x + c");
  return fit_on_cells(joint, f, [](const IndividualRecord& r) { return r.w == 1; }).coefficient("x");
}

glm::FitResult exact_ipw_fit(const JointDistribution& joint, bool condition_on_h) {
  // Stratum key over the conditioning variables.
  auto key = [&](const IndividualRecord& r) {
    return std::array<int, 4>{r.x, r.c, r.w, condition_on_h ? r.h : 0};
  };
  struct Sums {
    double all = 0.0;
    double tested = 0.0;
    double tested_infected = 0.0;
  };
  std::map<std::array<int, 4>, Sums> strata;
  for (const auto& cell : joint.cells()) {
    auto& s = strata[key(cell.record)];
    s.all += cell.probability;
    if (cell.record.t == 1) {
      s.tested += cell.probability;
      if (cell.record.y1 == 1) s.tested_infected += cell.probability;
    }
  }

  // One row per tested stratum, weighted by Pr(stratum, T = 1) / Pr(T = 1 | stratum).
  Eigen::MatrixXd design(static_cast<Eigen::Index>(strata.size()), 3);
  std::vector<double> response;
  std::vector<double> weights;
  Eigen::Index row = 0;
  for (const auto& [k, s] : strata) {
    if (s.tested <= 0.0) continue;
    const double q = s.tested_infected / s.tested;
    const double p = s.tested / s.all;
    design.row(row++) << 1.0, k[0], k[1];
    response.push_back(q);
    weights.push_back(s.tested / p);
  }
  design.conservativeResize(row, 3);
  const glm::DesignMatrix dm(std::move(design), {"(Intercept)", "x", "c"});
  return glm::fit_weighted_logistic(dm, response, weights);
}

}  // namespace tndipw
