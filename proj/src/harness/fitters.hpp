#pragma once

#include <vector>

#include "dataset.hpp"

namespace opeid {

// Ridge regression with an unpenalized intercept on standardized features,
// fit on train_rows and predicted on every row. Smooth by construction, so a
// small Lipschitz constant usually holds.
MuHat ridge_fit(const CovariateMatrix& X, const std::vector<double>& y,
                const std::vector<int>& train_rows, double penalty = 1.0);

// k-nearest-neighbor average (Euclidean), deliberately rough: useful to
// exercise infeasibility reporting.
MuHat knn_fit(const CovariateMatrix& X, const std::vector<double>& y,
              const std::vector<int>& train_rows, int k);

}  // namespace opeid
