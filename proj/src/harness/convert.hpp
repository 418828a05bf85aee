#pragma once

#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace opeid {

// Per-class action probabilities for the multiclass-to-bandit conversion.
// Behavior probabilities below the threshold are zeroed, then renormalized;
// classes the evaluation policy still wants are then no-overlap by design.
struct MulticlassPolicy {
  std::vector<double> behavior;  // one probability per class, sums to ~1
  std::vector<double> eval;
  double threshold = 0.05;
};

struct ConvertedBandit {
  std::vector<LoggedDataset> per_action;  // binarized, one dataset per class
  std::vector<double> behavior_used;      // post-threshold, renormalized
  std::vector<bool> unsupported;          // eval > 0 but behavior zeroed
};

// Outcome for action a is 1{a == label}; actions are sampled from the
// thresholded behavior policy with the supplied generator. Unsupported
// classes are flagged, not fatal: that is the no-overlap setting under study.
ConvertedBandit convert_multiclass(const CovariateMatrix& features,
                                   const std::vector<int>& labels,
                                   const MulticlassPolicy& policy, Rng& rng);

// Empirical ground truth treating the sample as the population:
// (1/n) * sum_i eval[label_i].
double empirical_policy_value(const std::vector<int>& labels,
                              const std::vector<double>& eval_probs);

}  // namespace opeid
