#include "harness/policy_study.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"
#include "errors.hpp"
#include "harness/fitters.hpp"

namespace opeid {

PolicyStudyReport threshold_policy_study(const ThresholdPolicySpec& spec, int n,
                                         const std::vector<double>& T_grid,
                                         const std::vector<double>& L_grid,
                                         std::uint64_t seed) {
  Rng rng(seed);
  auto draw = generate_threshold_policy(spec, n, rng);
  const int K = spec.n_actions;
  const OutcomeBounds bounds{0.0, 1.0};

  // The click model depends on x only through coordinate 2 for a fixed
  // action, so the regression uses that coordinate alone; this keeps the fit
  // smooth under the study metric.
  CovariateMatrix x2;
  x2.n = n;
  x2.p = 1;
  x2.values.resize(n);
  for (int i = 0; i < n; ++i) x2.values[i] = draw.per_action[0].covariates.at(i, 2);

  std::vector<MuHat> mus(K);
  for (int a = 0; a < K; ++a) {
    std::vector<int> train;
    for (int i = 0; i < n; ++i)
      if (draw.per_action[a].action_taken[i]) train.push_back(i);
    // Penalty proportional to the training size halves the slope estimate:
    // sparse actions see few Bernoulli outcomes, and an unshrunk slope can
    // breach the smoothness constant the study asserts.
    mus[a] = train.empty() ? draw.true_mu[a]
                           : ridge_fit(x2, draw.per_action[a].outcome, train,
                                       static_cast<double>(train.size()));
    for (double& v : mus[a].fitted) v = std::clamp(v, bounds.lower, bounds.upper);
  }

  EvaluateOptions options;
  options.estimator = EstimatorKind::Ipw;

  auto run_grid_point = [&](double L, double& lower, double& upper, double& psi_id,
                            bool& feasible) {
    std::vector<AssumptionSet> assumptions(K);
    for (int a = 0; a < K; ++a) {
      assumptions[a].bounds = bounds;
      assumptions[a].lipschitz = LipschitzAssumption{L, spec.metric()};
    }
    try {
      auto result = evaluate_multi_action(draw.per_action, mus, assumptions, options);
      lower = result.lower;
      upper = result.upper;
      psi_id = 0.0;
      for (const auto& r : result.per_action) psi_id += r.psi_id.value;
      feasible = true;
    } catch (const InfeasibleError&) {
      lower = upper = psi_id = 0.0;
      feasible = false;
    }
  };

  PolicyStudyReport report;
  for (double T : T_grid) {
    set_eval_threshold(spec, draw, T);
    double oracle = population_psi_threshold(spec, T, draw.v0, draw.in_target);

    double imputation = 0.0;
    {
      // psi_id plus the regression read off on the unsupported rows.
      double psi_id_total = 0.0, tail = 0.0;
      for (int a = 0; a < K; ++a) {
        psi_id_total +=
            estimate_identified(draw.per_action[a], EstimatorKind::Ipw).value;
        for (int i = 0; i < n; ++i)
          if (!draw.per_action[a].is_overlap(i))
            tail += draw.per_action[a].eval_prob[i] * mus[a].fitted[i];
      }
      imputation = psi_id_total + tail / n;
    }

    for (double L : L_grid) {
      PolicyStudyRow row;
      row.T = T;
      row.L = L;
      row.oracle = oracle;
      row.imputation = imputation;
      run_grid_point(L, row.lower, row.upper, row.psi_id, row.feasible);
      row.width = row.feasible ? row.upper - row.lower : 0.0;

      double manski_psi_id;
      bool manski_feasible;
      run_grid_point(kLipschitzInfinity, row.manski_lower, row.manski_upper, manski_psi_id,
                     manski_feasible);
      row.manski_width = row.manski_upper - row.manski_lower;
      row.narrowing =
          row.manski_width > 0.0 && row.feasible ? 1.0 - row.width / row.manski_width : 0.0;
      row.imputation_feasible = row.feasible;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace opeid
