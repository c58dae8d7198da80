#pragma once

#include "tndipw/enumeration.hpp"
#include "tndipw/estimators.hpp"

namespace tndipw {

/// Probability limits (infinite-sample values) of each analysis, computed by
/// replacing every sample fit with the same fit on the exact joint distribution.
double limit_tested_only(const JointDistribution& joint);
double limit_proper_tnd(const JointDistribution& joint);
/// Slopes of a case-control logistic fit do not depend on the sampling ratio,
/// so cases and controls enter with their population masses.
double limit_testpos_vs_controls(const JointDistribution& joint);
double limit_ipw(const JointDistribution& joint, const IpwSpec& spec);

}  // namespace tndipw
