#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "feasibility.hpp"

namespace opeid {

enum class BoundMethod {
  Manski,
  Lipschitz,
  LipschitzBounded,
  MonotoneBounded,
  Propagation,
  ConservativeNn,
};

std::string to_string(BoundMethod m);

struct UnidentifiedBounds {
  double lower = 0.0;  // psi2^-
  double upper = 0.0;  // psi2^+
  std::vector<int> rows;  // no-overlap row indices, ascending
  std::vector<double> per_point_lower;  // bracketed term per no-overlap row
  std::vector<double> per_point_upper;
  // Overlap row attaining the inner max/min (ties: lowest row index);
  // -1 where the box clamp or a fallback decided the value.
  std::vector<int> arg_lower;
  std::vector<int> arg_upper;
  BoundMethod method = BoundMethod::Manski;
  // Set when an empty overlap region forced the Manski fallback.
  bool manski_fallback = false;
};

// Boundedness-only bounds: per-point terms are the constants l and u.
UnidentifiedBounds manski_bounds(const LoggedDataset& data, double lower, double upper);

// Closed-form Lipschitz bounds (both sides). Requires the feasibility check
// to pass; throws InfeasibleError otherwise. With an empty overlap region,
// falls back to Manski when bounds are given and throws otherwise.
// A sentinel L dispatches directly to manski_bounds.
UnidentifiedBounds lipschitz_bounds(const LoggedDataset& data, const MuHat& mu, double L,
                                    const Metric& metric,
                                    std::optional<OutcomeBounds> bounds);

// Closed-form monotone bounds: each no-overlap point is bracketed by the
// fitted values of comparable overlap points, clamped by the box. Empty
// comparison sets fall back to the box endpoints.
UnidentifiedBounds monotone_bounds(const LoggedDataset& data, const MuHat& mu,
                                   const PartialOrder& order, double lower, double upper);

}  // namespace opeid
