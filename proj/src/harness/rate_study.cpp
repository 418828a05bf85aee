#include "harness/rate_study.hpp"

#include <algorithm>
#include <cmath>

#include "closed_form.hpp"
#include "errors.hpp"
#include "harness/fitters.hpp"

namespace opeid {

RateReport rate_study(const SyntheticSpec& spec, const std::vector<int>& n_grid,
                      int replications, double L, OutcomeBounds bounds, bool oracle_mu,
                      std::uint64_t seed) {
  spec.validate();
  if (replications < 1) throw InvariantError("rate study needs at least one replication");
  if (n_grid.empty()) throw InvariantError("rate study needs a nonempty n grid");

  RateReport report;
  report.replications = replications;
  report.population_psi2_lower = population_psi2_lower(spec, L, bounds.lower, bounds.upper);

  Rng base(seed);
  std::uint64_t stream = 0;
  for (int n : n_grid) {
    double sq = 0.0;
    for (int r = 0; r < replications; ++r) {
      Rng rng = base.derive(stream++);
      auto draw = generate(spec, n, rng);
      MuHat mu;
      if (oracle_mu) {
        mu = draw.true_mu;
      } else {
        std::vector<int> train;
        for (int i = 0; i < n; ++i)
          if (draw.data.action_taken[i]) train.push_back(i);
        mu = train.empty() ? draw.true_mu : ridge_fit(draw.data.covariates, draw.data.outcome, train);
        for (double& v : mu.fitted) v = std::clamp(v, bounds.lower, bounds.upper);
      }
      double est;
      try {
        est = lipschitz_bounds(draw.data, mu, L, Metric::euclidean(), bounds).lower;
      } catch (const InfeasibleError&) {
        est = manski_bounds(draw.data, bounds.lower, bounds.upper).lower;
      }
      double dev = est - report.population_psi2_lower;
      sq += dev * dev;
    }
    report.rows.push_back({n, sq / replications});
  }

  // Least-squares slope of log(mse) on log(n).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const auto& row : report.rows) {
    if (row.mse <= 0.0) continue;
    double x = std::log(static_cast<double>(row.n)), y = std::log(row.mse);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  report.slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  return report;
}

}  // namespace opeid
