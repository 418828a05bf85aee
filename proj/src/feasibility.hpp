#pragma once

#include <string>

#include "dataset.hpp"

namespace opeid {

inline constexpr double kFeasibilityTol = 1e-9;

struct FeasibilityReport {
  bool feasible = true;
  // max over overlap pairs of |mu_i - mu_j| / d(X_i, X_j); this is the
  // data-driven lower bound on any admissible L.
  double max_lipschitz_ratio = 0.0;
  bool has_ratio = false;  // false when fewer than two overlap rows
  int worst_i = -1;
  int worst_j = -1;
  double worst_slack = 0.0;  // most negative constraint slack found
  std::string violation;     // empty when feasible
};

// Checks every asserted constraint on overlap rows: the Lipschitz pair bound,
// monotone consistency on ordered pairs, and the box on fitted values.
// Infeasibility is a reported state, never an exception.
FeasibilityReport check_feasibility(const LoggedDataset& data, const MuHat& mu,
                                    const AssumptionSet& assumptions);

}  // namespace opeid
