#pragma once

#include "tndipw/records.hpp"
#include "tndipw/simulator.hpp"

#include <cstddef>
#include <cstdint>

namespace tndipw {

/// Simple random samples without replacement of `n_tested` tested members and
/// `n_controls` untested members. Tested records come first. The assumed
/// testing prevalence is the population's realized one.
/// Throws InsufficientStratumError when a stratum is too small.
StudySample sample_case_control(const Population& population, std::size_t n_tested, std::size_t n_controls,
                                std::uint64_t seed);

/// SRS of `n` tested symptomatic members plus `with_controls` untested members.
StudySample sample_proper_tnd(const Population& population, std::size_t n, std::size_t with_controls,
                              std::uint64_t seed);

/// Resamples with replacement inside the tested and the untested strata,
/// preserving both stratum sizes and the design metadata.
StudySample bootstrap_resample(const StudySample& sample, std::uint64_t seed);

}  // namespace tndipw
