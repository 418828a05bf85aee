#include "identified.hpp"

namespace opeid {

namespace {
// Kahan-compensated accumulator.
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
}  // namespace

IdentifiedEstimate estimate_identified(const LoggedDataset& data, EstimatorKind kind) {
  IdentifiedEstimate est;
  est.kind = kind;
  Accum weighted, weights;
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_overlap(i)) continue;
    ++est.n_overlap;
    if (data.action_taken[i] != 1) continue;
    double w = data.eval_prob[i] / data.behavior_prob[i];
    weighted.add(data.outcome[i] * w);
    weights.add(w);
  }
  if (est.n_overlap == 0) {
    est.degenerate = true;
    est.value = 0.0;
    return est;
  }
  if (kind == EstimatorKind::Ipw) {
    est.value = weighted.sum / data.n();
  } else {
    if (weights.sum == 0.0) {
      est.degenerate = true;
      est.value = 0.0;
    } else {
      est.value = weighted.sum / weights.sum;
    }
  }
  return est;
}

}  // namespace opeid
