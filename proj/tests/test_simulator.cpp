#include "oracles.hpp"

#include "tndipw/enumeration.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/rng.hpp"
#include "tndipw/sampling.hpp"
#include "tndipw/simulator.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

using namespace tndipw;

TEST_CASE("derive_seed separates streams and is deterministic") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  Rng a(derive_seed(9, {1})), b(derive_seed(9, {1}));
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("draw_record applies the structural equations in order") {
  auto s = default_scenario(3);
  // All-zero uniforms make every Bernoulli draw with positive probability succeed.
  const std::array<double, kDrawsPerRecord> zeros{};
  const auto r = draw_record(s, zeros);
  CHECK(r.c == 1);
  CHECK(r.x == 1);
  CHECK(r.u == 1);
  CHECK(r.h == 1);
  CHECK(r.y1 == 1);
  CHECK(r.w == 1);
  CHECK(r.t == 1);
  std::array<double, kDrawsPerRecord> ones;
  ones.fill(0.999999);
  const auto none = draw_record(s, ones);
  CHECK(none.c == 0);
  CHECK(none.y1 == 0);
  CHECK(none.t == 0);
  // Testing never reads y1: the draw is a function of (w, x, c, h, uniform).
  CHECK(draw_tested(s, 1, 0, 0, 0, 0.5) == (0.5 < prob_tested(s, 1, 0, 0, 0) ? 1 : 0));
  // Without H the h draw is ignored.
  CHECK(draw_record(default_scenario(1), zeros).h == 0);
}

TEST_CASE("population generation is independent of the thread count") {
  const auto s = default_scenario(1);
  const std::size_t n = 3 * kBlockSize + 123;
  const auto one = generate_population(s, n, 77, 1);
  const auto four = generate_population(s, n, 77, 4);
  CHECK(one.records == four.records);
  CHECK(generate_population(s, n, 78, 1).records != one.records);
  CHECK_THROWS_AS(generate_population(s, 0, 1), InvalidSpecError);
}

TEST_CASE("simulated margins agree with the exact distribution within binomial error") {
  const auto s = default_scenario(3);
  const auto pop = generate_population(s, 400'000, 12345, 2);
  const JointDistribution j(s);
  const double n = static_cast<double>(pop.size());
  for (const auto v : {Variable::c, Variable::x, Variable::h, Variable::y1, Variable::y_other, Variable::w, Variable::t}) {
    double count = 0;
    for (const auto& r : pop.records) count += r.value(v);
    const double p = j.mean(v);
    // 4.5 standard errors: a false alarm has probability below 1e-5 per margin.
    CHECK(std::abs(count / n - p) < 4.5 * oracle::binomial_se(p, n));
  }
  CHECK(testing_prevalence(pop) == doctest::Approx(j.mean(Variable::t)).epsilon(0.1));
}

TEST_CASE("true relative OR from a large population is close to the exact value") {
  const auto s = default_scenario(2);
  const auto pop = generate_population(s, 1'000'000, 2024, 2);
  const double exact = std::exp(exact_relative_log_or(JointDistribution(s)));
  CHECK(std::abs(std::log(true_relative_or(pop)) - std::log(exact)) < 0.08);
  std::vector<IndividualRecord> none(10);
  CHECK_THROWS_AS(true_relative_or(std::span<const IndividualRecord>(none)), Error);
}

TEST_CASE("case-control sampling draws the requested strata without replacement") {
  const auto pop = generate_population(default_scenario(1), 200'000, 5);
  const auto sample = sample_case_control(pop, 300, 500, 99);
  CHECK(sample.n_tested == 300);
  CHECK(sample.n_controls == 500);
  CHECK(sample.design == DesignTag::all_tested_plus_controls);
  CHECK(sample.q0_assumed == doctest::Approx(testing_prevalence(pop)));
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& r = sample.records[i];
    CHECK(r.tested() == (i < 300));  // tested first
    CHECK(pop.records[r.source_index()].t == (r.tested() ? 1 : 0));
    seen.insert(r.source_index());
  }
  CHECK(seen.size() == sample.size());
  const auto again = sample_case_control(pop, 300, 500, 99);
  for (std::size_t i = 0; i < sample.size(); ++i) CHECK(again.records[i].source_index() == sample.records[i].source_index());
  CHECK_THROWS_AS(sample_case_control(pop, 100'000, 10, 1), InsufficientStratumError);
  CHECK(sample_case_control(pop, 10, 0, 1).design == DesignTag::tested_only);
}

TEST_CASE("proper TND sampling keeps only tested symptomatic records") {
  const auto pop = generate_population(default_scenario(1), 200'000, 6);
  const auto tnd = sample_proper_tnd(pop, 50, 0, 3);
  CHECK(tnd.size() == 50);
  CHECK(tnd.design == DesignTag::proper_tnd);
  for (const auto& r : tnd.records) {
    CHECK(r.value(Variable::t) == 1);
    CHECK(r.value(Variable::w) == 1);
  }
  const auto with_controls = sample_proper_tnd(pop, 50, 20, 3);
  CHECK(with_controls.n_controls == 20);
  CHECK(with_controls.design == DesignTag::proper_tnd_plus_controls);
  CHECK_THROWS_AS(sample_proper_tnd(pop, 100'000, 0, 3), InsufficientStratumError);
}

TEST_CASE("bootstrap resampling preserves stratum sizes and metadata") {
  const auto pop = generate_population(default_scenario(1), 200'000, 7);
  const auto sample = sample_case_control(pop, 200, 300, 8);
  const auto boot = bootstrap_resample(sample, 42);
  CHECK(boot.n_tested == sample.n_tested);
  CHECK(boot.n_controls == sample.n_controls);
  CHECK(boot.size() == sample.size());
  CHECK(boot.design == sample.design);
  CHECK(boot.q0_assumed == sample.q0_assumed);
  std::size_t tested = 0;
  for (const auto& r : boot.records) tested += r.tested();
  CHECK(tested == 200);
  std::set<std::size_t> distinct;
  for (const auto& r : boot.records) distinct.insert(r.source_index());
  CHECK(distinct.size() < boot.size());  // with replacement
  const auto again = bootstrap_resample(sample, 42);
  for (std::size_t i = 0; i < boot.size(); ++i) CHECK(again.records[i].source_index() == boot.records[i].source_index());
}
