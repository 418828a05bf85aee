#include "feasibility.hpp"

#include <cmath>

#include "errors.hpp"

namespace opeid {

FeasibilityReport check_feasibility(const LoggedDataset& data, const MuHat& mu,
                                    const AssumptionSet& assumptions) {
  mu.validate(data.n());
  FeasibilityReport report;
  const auto overlap = data.overlap_rows();
  const auto& X = data.covariates;

  auto record_violation = [&](int i, int j, double slack, const std::string& what) {
    if (report.feasible || slack < report.worst_slack) {
      report.worst_i = i;
      report.worst_j = j;
      report.worst_slack = slack;
      report.violation = what;
    }
    report.feasible = false;
  };

  if (assumptions.bounds) {
    const auto [lo, hi] = *assumptions.bounds;
    for (int i : overlap) {
      double v = mu.fitted[i];
      if (v < lo - kFeasibilityTol)
        record_violation(i, -1, v - lo, "fitted value below lower outcome bound");
      if (v > hi + kFeasibilityTol)
        record_violation(i, -1, hi - v, "fitted value above upper outcome bound");
    }
  }

  if (assumptions.lipschitz && !assumptions.lipschitz_is_sentinel()) {
    const double L = assumptions.lipschitz->L;
    const Metric& metric = assumptions.lipschitz->metric;
    for (std::size_t a = 0; a < overlap.size(); ++a) {
      for (std::size_t b = a + 1; b < overlap.size(); ++b) {
        int i = overlap[a], j = overlap[b];
        double d = metric.distance(X, i, j);
        double gap = std::abs(mu.fitted[i] - mu.fitted[j]);
        if (d > 0.0) {
          double ratio = gap / d;
          if (!report.has_ratio || ratio > report.max_lipschitz_ratio) {
            report.max_lipschitz_ratio = ratio;
            report.has_ratio = true;
          }
        } else if (gap > kFeasibilityTol) {
          record_violation(i, j, -gap, "coincident overlap points with different fitted values");
          continue;
        }
        double slack = L * d - gap;
        if (slack < -kFeasibilityTol)
          record_violation(i, j, slack, "Lipschitz pair constraint violated");
      }
    }
  } else if (assumptions.lipschitz_is_sentinel()) {
    // Sentinel L: constraint vacuous, but still report the ratio diagnostic.
    const Metric& metric = assumptions.lipschitz->metric;
    for (std::size_t a = 0; a < overlap.size(); ++a)
      for (std::size_t b = a + 1; b < overlap.size(); ++b) {
        int i = overlap[a], j = overlap[b];
        double d = metric.distance(X, i, j);
        if (d > 0.0) {
          double ratio = std::abs(mu.fitted[i] - mu.fitted[j]) / d;
          if (!report.has_ratio || ratio > report.max_lipschitz_ratio) {
            report.max_lipschitz_ratio = ratio;
            report.has_ratio = true;
          }
        }
      }
  }

  if (assumptions.monotone) {
    const PartialOrder& order = *assumptions.monotone;
    for (std::size_t a = 0; a < overlap.size(); ++a)
      for (std::size_t b = 0; b < overlap.size(); ++b) {
        if (a == b) continue;
        int i = overlap[a], j = overlap[b];
        if (!order.precedes(X, i, j)) continue;
        double slack = mu.fitted[j] - mu.fitted[i];
        if (slack < -kFeasibilityTol)
          record_violation(i, j, slack, "monotone constraint violated on ordered overlap pair");
      }
  }

  return report;
}

}  // namespace opeid
