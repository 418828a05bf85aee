#pragma once

#include <cstdint>
#include <vector>

#include "harness/synthetic.hpp"

namespace opeid {

struct PolicyStudyRow {
  double T = 0.0;
  double L = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
  double manski_lower = 0.0;
  double manski_upper = 0.0;
  double manski_width = 0.0;
  double narrowing = 0.0;  // 1 - width/manski_width (0 when both are zero)
  double imputation = 0.0; // psi_id plus mu-hat read off on no-overlap rows
  double oracle = 0.0;     // population value of the evaluation policy
  double psi_id = 0.0;
  bool feasible = true;
  bool imputation_feasible = true;  // mu-hat satisfied the asserted constraints
};

struct PolicyStudyReport {
  std::vector<PolicyStudyRow> rows;  // T-major, L-minor, grid order
};

// One behavior sample shared across the whole (T, L) grid, so interval widths
// are comparable cell to cell. Regressions are ridge fits on the policy-
// relevant coordinate, clamped into [0, 1].
PolicyStudyReport threshold_policy_study(const ThresholdPolicySpec& spec, int n,
                                         const std::vector<double>& T_grid,
                                         const std::vector<double>& L_grid,
                                         std::uint64_t seed);

}  // namespace opeid
