#include "tndipw/sampling.hpp"

#include "tndipw/rng.hpp"

#include <fmt/format.h>

#include <functional>
#include <string_view>

namespace tndipw {

namespace {

std::vector<std::size_t> indices_where(const Population& pop, const std::function<bool(const IndividualRecord&)>& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pop.records.size(); ++i) {
    if (pred(pop.records[i])) out.push_back(i);
  }
  return out;
}

// Partial Fisher-Yates: the first k entries become an SRS of the pool.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t k, Rng& rng,
                                                  std::string_view stratum) {
  if (k > pool.size()) {
    throw InsufficientStratumError(
        fmt::format("requested {} {} records but the population has only {}", k, stratum, pool.size()));
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void append(std::vector<ObservedRecord>& out, const Population& pop, const std::vector<std::size_t>& idx) {
  for (const std::size_t i : idx) out.emplace_back(pop.records[i], i);
}

}  // namespace

StudySample sample_case_control(const Population& population, std::size_t n_tested, std::size_t n_controls,
                                std::uint64_t seed) {
  Rng rng(seed);
  const auto tested = draw_without_replacement(
      indices_where(population, [](const IndividualRecord& r) { return r.t == 1; }), n_tested, rng, "tested");
  const auto controls = draw_without_replacement(
      indices_where(population, [](const IndividualRecord& r) { return r.t == 0; }), n_controls, rng, "untested");
  std::vector<ObservedRecord> records;
  records.reserve(n_tested + n_controls);
  append(records, population, tested);
  append(records, population, controls);
  const DesignTag tag = n_controls == 0 ? DesignTag::tested_only : DesignTag::all_tested_plus_controls;
  return make_sample(std::move(records), tag, testing_prevalence(population));
}

StudySample sample_proper_tnd(const Population& population, std::size_t n, std::size_t with_controls,
                              std::uint64_t seed) {
  Rng rng(seed);
  const auto cases = draw_without_replacement(
      indices_where(population, [](const IndividualRecord& r) { return r.t == 1 && r.w == 1; }), n, rng,
      "tested symptomatic");
  const auto controls = draw_without_replacement(
      indices_where(population, [](const IndividualRecord& r) { return r.t == 0; }), with_controls, rng,
      "untested");
  std::vector<ObservedRecord> records;
  records.reserve(n + with_controls);
  append(records, population, cases);
  append(records, population, controls);
  const DesignTag tag = with_controls == 0 ? DesignTag::proper_tnd : DesignTag::proper_tnd_plus_controls;
  return make_sample(std::move(records), tag, testing_prevalence(population));
}

StudySample bootstrap_resample(const StudySample& sample, std::uint64_t seed) {
  std::vector<std::size_t> tested;
  std::vector<std::size_t> untested;
  for (std::size_t i = 0; i < sample.records.size(); ++i) {
    (sample.records[i].tested() ? tested : untested).push_back(i);
  }
  Rng rng(seed);
  std::vector<ObservedRecord> records;
  records.reserve(sample.records.size());
  for (const auto* stratum : {&tested, &untested}) {
    for (std::size_t k = 0; k < stratum->size(); ++k) {
      records.push_back(sample.records[(*stratum)[rng.below(stratum->size())]]);
    }
  }
  StudySample out = make_sample(std::move(records), sample.design, sample.q0_assumed);
  out.annotations = sample.annotations;
  return out;
}

}  // namespace tndipw
