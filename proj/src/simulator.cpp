#include "tndipw/simulator.hpp"

#include "tndipw/enumeration.hpp"
#include "tndipw/parallel.hpp"
#include "tndipw/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace tndipw {

IndividualRecord draw_record(const ScenarioSpec& spec, std::span<const double, kDrawsPerRecord> u) {
  IndividualRecord r;
  r.c = u[0] < spec.p_c;
  r.x = u[1] < prob_x(spec, r.c);
  r.u = u[2] < spec.p_u;
  r.h = spec.has_h() && u[3] < spec.p_h;
  r.y1 = u[4] < prob_infection(spec, r.x, r.c, r.u, r.h);
  r.y_other = u[5] < prob_other_infection(spec, r.x, r.c, r.u);
  r.w = u[6] < prob_symptoms(spec, r.y1, r.y_other);
  r.t = draw_tested(spec, r.w, r.x, r.c, r.h, u[7]);
  return r;
}

std::uint8_t draw_tested(const ScenarioSpec& spec, int w, int x, int c, int h, double uniform) {
  return uniform < prob_tested(spec, w, x, c, h) ? 1 : 0;
}

Population generate_population(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed, std::size_t threads) {
  validate(spec);
  if (n == 0) throw InvalidSpecError("population size must be at least 1");
  Population pop;
  pop.spec = spec;
  pop.seed = seed;
  pop.records.resize(n);
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {stream_id(Stream::population), b}));
    const std::size_t end = std::min(n, (b + 1) * kBlockSize);
    std::array<double, kDrawsPerRecord> draws{};
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      for (auto& d : draws) d = rng.uniform();
      pop.records[i] = draw_record(spec, draws);
    }
  });
  return pop;
}

ProspectiveTruth true_prospective_or(const ScenarioSpec& spec) {
  validate(spec);
  const bool latent_on_infection = (spec.infection.u != 0.0 && spec.p_u > 0.0 && spec.p_u < 1.0) ||
                                   (spec.infection.h != 0.0 && spec.p_h > 0.0 && spec.p_h < 1.0);
  if (!latent_on_infection) return {std::exp(spec.infection.x), false};
  return {std::exp(exact_prospective_log_or(JointDistribution(spec))), true};
}

double true_relative_or(std::span<const IndividualRecord> records) {
  std::vector<IndividualRecord> symptomatic;
  std::copy_if(records.begin(), records.end(), std::back_inserter(symptomatic),
               [](const IndividualRecord& r) { return r.w == 1; });
  if (symptomatic.empty()) throw Error("no symptomatic members in the population");
  static const Formula formula = Formula::parse("y1 ~ x + c");
  const ModelFrame frame = build_design(std::span<const IndividualRecord>(symptomatic), formula);
  const auto fit = glm::fit_logistic(frame.design, frame.response);
  return std::exp(fit.coefficient("x"));
}

double true_relative_or(const Population& population) { return true_relative_or(population.records); }

double testing_prevalence(std::span<const IndividualRecord> records) {
  if (records.empty()) return 0.0;
  const auto tested = std::count_if(records.begin(), records.end(), [](const IndividualRecord& r) { return r.t; });
  return static_cast<double>(tested) / static_cast<double>(records.size());
}

double testing_prevalence(const Population& population) { return testing_prevalence(population.records); }

}  // namespace tndipw
