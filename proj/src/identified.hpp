#pragma once

#include "dataset.hpp"

namespace opeid {

enum class EstimatorKind { Ipw, SelfNormalized };

struct IdentifiedEstimate {
  double value = 0.0;
  EstimatorKind kind = EstimatorKind::SelfNormalized;
  int n_overlap = 0;
  // Set when no row contributes (empty overlap region or zero normalizer);
  // the estimate is then 0 by convention.
  bool degenerate = false;
};

// psi_id via importance weighting over the overlap region. The ipw variant
// divides by n; the self-normalized variant divides by the realized weight
// mass. Summation is compensated so the result is order-deterministic.
IdentifiedEstimate estimate_identified(const LoggedDataset& data, EstimatorKind kind);

}  // namespace opeid
