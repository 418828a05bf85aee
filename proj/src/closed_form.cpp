#include "closed_form.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace opeid {

std::string to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::Manski: return "manski";
    case BoundMethod::Lipschitz: return "lipschitz";
    case BoundMethod::LipschitzBounded: return "lipschitz-bounded";
    case BoundMethod::MonotoneBounded: return "monotone-bounded";
    case BoundMethod::Propagation: return "propagation";
    case BoundMethod::ConservativeNn: return "conservative-nn";
  }
  return "?";
}

namespace {

struct Accum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// (1/n) sum over no-overlap rows of pi_e * per-point term. Zero-weight rows
// are skipped so an infinite per-point value with weight 0 contributes 0.
double aggregate(const LoggedDataset& data, const std::vector<int>& rows,
                 const std::vector<double>& per_point) {
  Accum acc;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double w = data.eval_prob[rows[k]];
    if (w == 0.0) continue;
    acc.add(w * per_point[k]);
  }
  return acc.sum / data.n();
}

}  // namespace

UnidentifiedBounds manski_bounds(const LoggedDataset& data, double lower, double upper) {
  if (!(lower <= upper)) throw InvariantError("outcome bounds must satisfy lower <= upper");
  UnidentifiedBounds out;
  out.method = BoundMethod::Manski;
  out.rows = data.no_overlap_rows();
  out.per_point_lower.assign(out.rows.size(), lower);
  out.per_point_upper.assign(out.rows.size(), upper);
  out.arg_lower.assign(out.rows.size(), -1);
  out.arg_upper.assign(out.rows.size(), -1);
  out.lower = aggregate(data, out.rows, out.per_point_lower);
  out.upper = aggregate(data, out.rows, out.per_point_upper);
  return out;
}

UnidentifiedBounds lipschitz_bounds(const LoggedDataset& data, const MuHat& mu, double L,
                                    const Metric& metric,
                                    std::optional<OutcomeBounds> bounds) {
  if (L >= kLipschitzSentinelThreshold) {
    if (!bounds)
      throw InvariantError("sentinel L without outcome bounds leaves psi2 unbounded");
    auto out = manski_bounds(data, bounds->lower, bounds->upper);
    return out;
  }

  AssumptionSet assumptions;
  assumptions.lipschitz = LipschitzAssumption{L, metric};
  assumptions.bounds = bounds;
  auto report = check_feasibility(data, mu, assumptions);
  if (!report.feasible)
    throw InfeasibleError(
        "Lipschitz assumption infeasible: " + report.violation + " (rows " +
            std::to_string(report.worst_i) + "," + std::to_string(report.worst_j) +
            "); data requires L >= " + std::to_string(report.max_lipschitz_ratio),
        report.max_lipschitz_ratio);

  const auto overlap = data.overlap_rows();
  UnidentifiedBounds out;
  out.method = bounds ? BoundMethod::LipschitzBounded : BoundMethod::Lipschitz;
  out.rows = data.no_overlap_rows();

  if (overlap.empty()) {
    if (!bounds)
      throw InvariantError(
          "empty overlap region and no outcome bounds: psi2 bounds are undefined");
    out = manski_bounds(data, bounds->lower, bounds->upper);
    out.method = BoundMethod::LipschitzBounded;
    out.manski_fallback = true;
    return out;
  }

  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double pos_inf = std::numeric_limits<double>::infinity();
  const double lo = bounds ? bounds->lower : neg_inf;
  const double hi = bounds ? bounds->upper : pos_inf;
  const auto& X = data.covariates;

  out.per_point_lower.resize(out.rows.size());
  out.per_point_upper.resize(out.rows.size());
  out.arg_lower.assign(out.rows.size(), -1);
  out.arg_upper.assign(out.rows.size(), -1);

  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const int i = out.rows[k];
    double best_lo = neg_inf, best_hi = pos_inf;
    int arg_lo = -1, arg_hi = -1;
    for (int j : overlap) {
      double d = metric.distance(X, i, j);
      double cand_lo = mu.fitted[j] - L * d;
      double cand_hi = mu.fitted[j] + L * d;
      if (cand_lo > best_lo) {
        best_lo = cand_lo;
        arg_lo = j;
      }
      if (cand_hi < best_hi) {
        best_hi = cand_hi;
        arg_hi = j;
      }
    }
    if (best_lo < lo) {
      best_lo = lo;
      arg_lo = -1;
    }
    if (best_hi > hi) {
      best_hi = hi;
      arg_hi = -1;
    }
    out.per_point_lower[k] = best_lo;
    out.per_point_upper[k] = best_hi;
    out.arg_lower[k] = arg_lo;
    out.arg_upper[k] = arg_hi;
  }

  out.lower = aggregate(data, out.rows, out.per_point_lower);
  out.upper = aggregate(data, out.rows, out.per_point_upper);
  return out;
}

UnidentifiedBounds monotone_bounds(const LoggedDataset& data, const MuHat& mu,
                                   const PartialOrder& order, double lower, double upper) {
  if (!(lower <= upper)) throw InvariantError("outcome bounds must satisfy lower <= upper");

  AssumptionSet assumptions;
  assumptions.monotone = order;
  assumptions.bounds = OutcomeBounds{lower, upper};
  auto report = check_feasibility(data, mu, assumptions);
  if (!report.feasible)
    throw InfeasibleError("monotone assumption infeasible: " + report.violation + " (rows " +
                              std::to_string(report.worst_i) + "," +
                              std::to_string(report.worst_j) + ")",
                          0.0);

  const auto overlap = data.overlap_rows();
  const auto& X = data.covariates;
  UnidentifiedBounds out;
  out.method = BoundMethod::MonotoneBounded;
  out.rows = data.no_overlap_rows();
  out.per_point_lower.resize(out.rows.size());
  out.per_point_upper.resize(out.rows.size());
  out.arg_lower.assign(out.rows.size(), -1);
  out.arg_upper.assign(out.rows.size(), -1);

  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const int i = out.rows[k];
    double best_lo = lower, best_hi = upper;
    int arg_lo = -1, arg_hi = -1;
    for (int j : overlap) {
      if (order.precedes(X, j, i) && mu.fitted[j] > best_lo) {
        best_lo = mu.fitted[j];
        arg_lo = j;
      }
      if (order.precedes(X, i, j) && mu.fitted[j] < best_hi) {
        best_hi = mu.fitted[j];
        arg_hi = j;
      }
    }
    out.per_point_lower[k] = best_lo;
    out.per_point_upper[k] = best_hi;
    out.arg_lower[k] = arg_lo;
    out.arg_upper[k] = arg_hi;
  }

  out.lower = aggregate(data, out.rows, out.per_point_lower);
  out.upper = aggregate(data, out.rows, out.per_point_upper);
  return out;
}

}  // namespace opeid
