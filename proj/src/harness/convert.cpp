#include "harness/convert.hpp"

#include <cmath>

#include "errors.hpp"

namespace opeid {

ConvertedBandit convert_multiclass(const CovariateMatrix& features,
                                   const std::vector<int>& labels,
                                   const MulticlassPolicy& policy, Rng& rng) {
  features.validate();
  const int n = features.n;
  const int K = static_cast<int>(policy.behavior.size());
  if (K < 2) throw InvariantError("multiclass conversion needs at least two classes");
  if (policy.eval.size() != static_cast<std::size_t>(K))
    throw InvariantError("behavior and eval probability vectors must have equal length");
  if (labels.size() != static_cast<std::size_t>(n))
    throw InvariantError("label vector length must match the feature rows");
  for (int y : labels)
    if (y < 0 || y >= K) throw InvariantError("label out of class range");
  for (double q : policy.eval)
    if (!(q >= 0.0 && q <= 1.0)) throw InvariantError("eval probabilities must be in [0,1]");

  ConvertedBandit out;
  out.behavior_used.resize(K);
  double mass = 0.0;
  for (int a = 0; a < K; ++a) {
    double q = policy.behavior[a];
    if (!(q >= 0.0 && q <= 1.0)) throw InvariantError("behavior probabilities must be in [0,1]");
    out.behavior_used[a] = q < policy.threshold ? 0.0 : q;
    mass += out.behavior_used[a];
  }
  if (mass <= 0.0)
    throw InvariantError("thresholding removed every class from the behavior policy");
  for (double& q : out.behavior_used) q /= mass;

  out.unsupported.resize(K);
  for (int a = 0; a < K; ++a)
    out.unsupported[a] = policy.eval[a] > 0.0 && out.behavior_used[a] == 0.0;

  std::vector<int> chosen(n);
  for (int i = 0; i < n; ++i) chosen[i] = rng.categorical(out.behavior_used.data(), K);

  out.per_action.resize(K);
  for (int a = 0; a < K; ++a) {
    auto& d = out.per_action[a];
    d.covariates = features;
    d.behavior_prob.assign(n, out.behavior_used[a]);
    d.eval_prob.assign(n, policy.eval[a]);
    d.action_taken.resize(n);
    d.outcome.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      d.action_taken[i] = chosen[i] == a ? 1 : 0;
      if (chosen[i] == a) d.outcome[i] = labels[i] == a ? 1.0 : 0.0;
    }
  }
  return out;
}

double empirical_policy_value(const std::vector<int>& labels,
                              const std::vector<double>& eval_probs) {
  double s = 0.0;
  for (int y : labels) s += eval_probs[y];
  return s / labels.size();
}

}  // namespace opeid
