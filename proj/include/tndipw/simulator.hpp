#pragma once

#include "tndipw/records.hpp"
#include "tndipw/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tndipw {

struct Population {
  std::vector<IndividualRecord> records;
  ScenarioSpec spec;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return records.size(); }
};

/// Uniform draws consumed per record, in generation order C, X, U, H, Y1, Y_other, W, T.
inline constexpr std::size_t kDrawsPerRecord = 8;
/// Records per independently seeded block.
inline constexpr std::size_t kBlockSize = 1 << 16;

/// Generates one record from its eight uniforms in topological order.
IndividualRecord draw_record(const ScenarioSpec& spec, std::span<const double, kDrawsPerRecord> uniforms);

/// Testing draw from (w, x, c, h) and the record's own uniform; y1 is not an input.
std::uint8_t draw_tested(const ScenarioSpec& spec, int w, int x, int c, int h, double uniform);

/// Independent records; block b uses the stream derive_seed(seed, {population, b}),
/// so the result does not depend on `threads`.
Population generate_population(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed, std::size_t threads = 1);

struct ProspectiveTruth {
  double odds_ratio = 1.0;
  /// True when U or H loads on infection and the value came from enumeration.
  bool non_collapsible = false;
};

ProspectiveTruth true_prospective_or(const ScenarioSpec& spec);

/// ML fit of y1 ~ 1 + x + c over symptomatic members with complete data.
/// Throws Error when the stratum is empty and SeparationError when degenerate.
double true_relative_or(std::span<const IndividualRecord> records);
double true_relative_or(const Population& population);

double testing_prevalence(std::span<const IndividualRecord> records);
double testing_prevalence(const Population& population);

}  // namespace tndipw
