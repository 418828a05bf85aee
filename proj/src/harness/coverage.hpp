#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "harness/synthetic.hpp"

namespace opeid {

struct CoverageCell {
  int n = 0;
  double L = 0.0;  // as configured (may be negative, see below)
  double coverage = 0.0;
  double feasibility = 0.0;
  int replications = 0;
};

struct CoverageReport {
  std::vector<CoverageCell> cells;
  double psi_true = 0.0;
  double eps = 0.0;
};

// Monte Carlo coverage of the partial-identification interval against the
// population value, one cell per (n, L). Each replication draws a fresh
// sample, fits a ridge regression on the observed rows, clamps it into the
// box, and evaluates. Infeasible replications count as non-covering.
//
// A negative grid entry L < 0 means "a fraction |L| of the replication's own
// data-driven minimum L", which is infeasible by construction for |L| < 1;
// this exercises the infeasibility-rate reporting.
CoverageReport simulate_coverage(const SyntheticSpec& spec, const std::vector<int>& n_grid,
                                 const std::vector<double>& L_grid, int replications,
                                 double eps, OutcomeBounds bounds, std::uint64_t seed);

// Resampling variant: replications draw n rows with replacement from the
// source sample, and the ground truth is the value under the empirical
// distribution, which needs the counterfactual outcome of every row.
CoverageReport simulate_coverage_resample(const LoggedDataset& source,
                                          const std::vector<double>& counterfactual_outcome,
                                          const std::vector<int>& n_grid,
                                          const std::vector<double>& L_grid, int replications,
                                          double eps, OutcomeBounds bounds, std::uint64_t seed);

}  // namespace opeid
