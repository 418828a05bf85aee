#pragma once

#include <optional>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "dataset.hpp"
#include "feasibility.hpp"
#include "identified.hpp"
#include "nn_index.hpp"

namespace opeid {

struct EvaluateOptions {
  EstimatorKind estimator = EstimatorKind::SelfNormalized;
  bool conservative = false;  // nearest-neighbor approximation of psi2
  bool clamp_mu = false;      // clamp fitted values into the box instead of erroring
  bool full_triangle_check = false;
};

struct BoundResult {
  IdentifiedEstimate psi_id;
  UnidentifiedBounds psi2;
  double lower = 0.0;  // psi_id + psi2.lower
  double upper = 0.0;  // psi_id + psi2.upper
  std::string method_used;
  FeasibilityReport feasibility;
  double fraction_no_overlap = 0.0;
  bool empty_overlap = false;
  // Plug-in variance of the per-point lower terms, diagnostic only; this has
  // no population counterpart in the estimator's guarantees.
  double per_point_lower_variance = 0.0;
};

// Routes the assumption set to the right estimator for psi2 and assembles
// the interval. Lipschitz+monotone goes through the propagation solver;
// everything else uses the closed forms. Throws InfeasibleError when the
// fitted values contradict the assumptions.
BoundResult evaluate(const LoggedDataset& data, const MuHat& mu,
                     const AssumptionSet& assumptions, const EvaluateOptions& options = {});

struct MultiActionResult {
  std::vector<BoundResult> per_action;
  double lower = 0.0;  // sum of per-action lower endpoints
  double upper = 0.0;
};

// Binarized per-action problems summed endpoint-wise. All datasets must
// share n (and, implicitly, covariates).
MultiActionResult evaluate_multi_action(const std::vector<LoggedDataset>& datasets,
                                        const std::vector<MuHat>& mus,
                                        const std::vector<AssumptionSet>& assumptions,
                                        const EvaluateOptions& options = {});

struct SweepCell {
  double L = 0.0;
  bool feasible = false;
  std::optional<BoundResult> result;
  std::string infeasible_reason;
  double l_lower_bound = 0.0;  // data-driven minimum L, when known
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered as the input grid
};

// One evaluation per L. Conservative mode builds the nearest-neighbor index
// once; exact mode reuses a single distance pass when memory allows.
// Infeasible cells are marked, not fatal.
SweepResult sweep_L(const LoggedDataset& data, const MuHat& mu,
                    const AssumptionSet& base_assumptions, const std::vector<double>& L_grid,
                    const EvaluateOptions& options = {});

}  // namespace opeid
