#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "harness/synthetic.hpp"

namespace opeid {

struct RateRow {
  int n = 0;
  double mse = 0.0;  // mean squared deviation of psi2-hat-lower from the population value
};

struct RateReport {
  std::vector<RateRow> rows;
  double slope = 0.0;  // least-squares slope of log(mse) on log(n)
  double population_psi2_lower = 0.0;
  int replications = 0;
};

// Convergence of the estimated lower bound on the unidentified part toward
// its population counterpart. oracle_mu plugs in the true regression instead
// of the ridge fit. Replications that turn infeasible fall back to the
// boundedness-only lower bound (deterministic, conservative).
RateReport rate_study(const SyntheticSpec& spec, const std::vector<int>& n_grid,
                      int replications, double L, OutcomeBounds bounds, bool oracle_mu,
                      std::uint64_t seed);

}  // namespace opeid
