#include "harness/coverage.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"
#include "errors.hpp"
#include "harness/fitters.hpp"

namespace opeid {

namespace {

struct RepOutcome {
  bool feasible = false;
  bool covered = false;
};

RepOutcome run_replication(const LoggedDataset& data, double L_config, double eps,
                           OutcomeBounds bounds, double psi_true) {
  std::vector<int> train;
  for (int i = 0; i < data.n(); ++i)
    if (data.action_taken[i]) train.push_back(i);
  RepOutcome rep;
  if (train.empty()) return rep;

  MuHat mu = ridge_fit(data.covariates, data.outcome, train);
  for (double& v : mu.fitted) v = std::clamp(v, bounds.lower, bounds.upper);

  double L = L_config;
  if (L < 0.0) {
    // Fraction of this replication's own data-driven minimum L.
    AssumptionSet probe;
    probe.bounds = bounds;
    probe.lipschitz = LipschitzAssumption{kLipschitzInfinity, Metric::euclidean()};
    auto report = check_feasibility(data, mu, probe);
    L = -L_config * report.max_lipschitz_ratio;
  }

  AssumptionSet assumptions;
  assumptions.bounds = bounds;
  assumptions.lipschitz = LipschitzAssumption{L, Metric::euclidean()};
  // Unnormalized weighting: the decomposition compares psi_id + psi2 against
  // the population value, and the self-normalized ratio estimator targets a
  // different scale whenever the no-overlap region has mass.
  EvaluateOptions options;
  options.estimator = EstimatorKind::Ipw;
  try {
    auto result = evaluate(data, mu, assumptions, options);
    rep.feasible = true;
    rep.covered = result.lower - eps <= psi_true && psi_true <= result.upper + eps;
  } catch (const InfeasibleError&) {
    // counts as neither feasible nor covering
  }
  return rep;
}

template <typename DrawFn>
CoverageReport run_grid(DrawFn draw, const std::vector<int>& n_grid,
                        const std::vector<double>& L_grid, int replications, double eps,
                        OutcomeBounds bounds, double psi_true, std::uint64_t seed) {
  if (replications < 1) throw InvariantError("coverage needs at least one replication");
  CoverageReport report;
  report.psi_true = psi_true;
  report.eps = eps;
  Rng base(seed);
  std::uint64_t cell_index = 0;
  for (int n : n_grid)
    for (double L : L_grid) {
      int feasible = 0, covered = 0;
      for (int r = 0; r < replications; ++r) {
        Rng rng = base.derive(cell_index * replications + r);
        LoggedDataset data = draw(n, rng);
        auto rep = run_replication(data, L, eps, bounds, psi_true);
        feasible += rep.feasible ? 1 : 0;
        covered += rep.covered ? 1 : 0;
      }
      report.cells.push_back({n, L, static_cast<double>(covered) / replications,
                              static_cast<double>(feasible) / replications, replications});
      ++cell_index;
    }
  return report;
}

}  // namespace

CoverageReport simulate_coverage(const SyntheticSpec& spec, const std::vector<int>& n_grid,
                                 const std::vector<double>& L_grid, int replications,
                                 double eps, OutcomeBounds bounds, std::uint64_t seed) {
  spec.validate();
  double psi_true = population_psi(spec);
  return run_grid([&](int n, Rng& rng) { return generate(spec, n, rng).data; }, n_grid,
                  L_grid, replications, eps, bounds, psi_true, seed);
}

CoverageReport simulate_coverage_resample(const LoggedDataset& source,
                                          const std::vector<double>& counterfactual_outcome,
                                          const std::vector<int>& n_grid,
                                          const std::vector<double>& L_grid, int replications,
                                          double eps, OutcomeBounds bounds,
                                          std::uint64_t seed) {
  source.validate();
  if (counterfactual_outcome.size() != static_cast<std::size_t>(source.n()))
    throw InvariantError("counterfactual outcomes must cover every source row");
  // Empirical distribution as ground truth.
  double psi_true = 0.0;
  for (int i = 0; i < source.n(); ++i) psi_true += source.eval_prob[i] * counterfactual_outcome[i];
  psi_true /= source.n();

  auto draw = [&](int n, Rng& rng) {
    LoggedDataset out;
    out.covariates.n = n;
    out.covariates.p = source.covariates.p;
    out.covariates.values.resize(static_cast<std::size_t>(n) * source.covariates.p);
    out.behavior_prob.resize(n);
    out.eval_prob.resize(n);
    out.action_taken.resize(n);
    out.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
      int s = static_cast<int>(rng.index(source.n()));
      auto row = source.covariates.row(s);
      std::copy(row.begin(), row.end(),
                out.covariates.values.begin() + static_cast<std::size_t>(i) * out.covariates.p);
      out.behavior_prob[i] = source.behavior_prob[s];
      out.eval_prob[i] = source.eval_prob[s];
      out.action_taken[i] = source.action_taken[s];
      out.outcome[i] = source.outcome[s];
    }
    return out;
  };
  return run_grid(draw, n_grid, L_grid, replications, eps, bounds, psi_true, seed);
}

}  // namespace opeid
