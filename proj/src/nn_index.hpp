#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "closed_form.hpp"
#include "dataset.hpp"

namespace opeid {

// Nearest overlap neighbor of every no-overlap row. L-independent, so one
// index serves a whole sensitivity sweep.
struct NnIndex {
  std::vector<int> rows;       // no-overlap row indices, ascending
  std::vector<int> neighbor;   // overlap row index per entry
  std::vector<double> dist;    // d(X_i, X_nn(i))
  std::vector<double> mu_at_neighbor;
  std::uint64_t dataset_fingerprint = 0;
};

// Exact nearest neighbors; ties go to the lowest overlap row index.
// Brute force in general; a kd-tree fast path serves Euclidean metrics with
// p <= 16. Throws on an empty overlap region.
NnIndex build_nn_index(const LoggedDataset& data, const MuHat& mu, const Metric& metric);

// Single-neighbor conservative bounds: never tighter than the exact closed
// form on either side. O(#no-overlap rows) given the index.
UnidentifiedBounds conservative_bounds(const NnIndex& index, const LoggedDataset& data,
                                       const MuHat& mu, double L,
                                       std::optional<OutcomeBounds> bounds);

}  // namespace opeid
