#pragma once

#include "tndipw/harness.hpp"
#include "tndipw/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace tndipw {

/// Everything a config file can set. Sections (all optional):
///
///   scenario:     id, p_c, p_x_given_c [c=0, c=1], p_u, p_h,
///                 infection {intercept, x, c, u, h},
///                 other_infection {intercept, x, c, u},
///                 symptoms {baseline, given_infection, given_other},
///                 testing {intercept, w, x, c, wx, h, xh},
///                 calibration {infection_prevalence, other_infection_prevalence,
///                              testing_prevalence} or `calibration: none`
///   experiment:   profile, population_size, n_tested, n_controls, replicates,
///                 bootstrap_b, ci_level, methods [...], base_seed, threads,
///                 fixed_population, truth_population_size, q0
///   output:       out_dir
///
/// Unset scenario fields keep the preset for `scenario.id`; unset experiment
/// fields keep the profile's values. Intercepts are re-solved whenever
/// calibration targets apply.
struct RunConfig {
  ExperimentConfig experiment;
  std::optional<std::filesystem::path> out_dir;
};

/// Throws ConfigError on malformed text, unknown keys or invalid values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Scenario section only; `text` holds the mapping body of `scenario:`.
ScenarioSpec parse_scenario(const std::string& text);

/// The same format, fully populated, so a run can be reproduced from it.
std::string emit_run_config(const RunConfig& config);

}  // namespace tndipw
