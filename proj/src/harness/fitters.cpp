#include "harness/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace opeid {

namespace {

// Gaussian elimination with partial pivoting; A is m x m row-major.
std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b, int m) {
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(A[r * m + col]) > std::abs(A[pivot * m + col])) pivot = r;
    if (std::abs(A[pivot * m + col]) < 1e-12)
      throw InvariantError("singular system in ridge fit");
    if (pivot != col) {
      for (int c = 0; c < m; ++c) std::swap(A[col * m + c], A[pivot * m + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < m; ++r) {
      double f = A[r * m + col] / A[col * m + col];
      for (int c = col; c < m; ++c) A[r * m + c] -= f * A[col * m + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(m);
  for (int r = m - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < m; ++c) s -= A[r * m + c] * x[c];
    x[r] = s / A[r * m + r];
  }
  return x;
}

}  // namespace

MuHat ridge_fit(const CovariateMatrix& X, const std::vector<double>& y,
                const std::vector<int>& train_rows, double penalty) {
  if (train_rows.empty()) throw InvariantError("ridge fit needs at least one training row");
  const int p = X.p;
  const int m = p + 1;  // intercept first

  // Standardize features over the training rows.
  std::vector<double> mean(p, 0.0), sd(p, 1.0);
  for (int j = 0; j < p; ++j) {
    double s = 0.0;
    for (int i : train_rows) s += X.at(i, j);
    mean[j] = s / train_rows.size();
    double ss = 0.0;
    for (int i : train_rows) {
      double d = X.at(i, j) - mean[j];
      ss += d * d;
    }
    double v = ss / train_rows.size();
    sd[j] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }
  auto z = [&](int i, int j) { return (X.at(i, j) - mean[j]) / sd[j]; };

  // Normal equations (Z'Z + penalty*I)beta = Z'y, intercept unpenalized.
  std::vector<double> A(static_cast<std::size_t>(m) * m, 0.0), b(m, 0.0);
  for (int i : train_rows) {
    std::vector<double> row(m);
    row[0] = 1.0;
    for (int j = 0; j < p; ++j) row[j + 1] = z(i, j);
    for (int r = 0; r < m; ++r) {
      b[r] += row[r] * y[i];
      for (int c = 0; c < m; ++c) A[r * m + c] += row[r] * row[c];
    }
  }
  for (int j = 1; j < m; ++j) A[j * m + j] += penalty;

  auto beta = solve_linear(std::move(A), std::move(b), m);

  MuHat mu;
  mu.fitted.resize(X.n);
  for (int i = 0; i < X.n; ++i) {
    double v = beta[0];
    for (int j = 0; j < p; ++j) v += beta[j + 1] * z(i, j);
    mu.fitted[i] = v;
  }
  return mu;
}

MuHat knn_fit(const CovariateMatrix& X, const std::vector<double>& y,
              const std::vector<int>& train_rows, int k) {
  if (train_rows.empty()) throw InvariantError("knn fit needs at least one training row");
  if (k < 1) throw InvariantError("knn fit needs k >= 1");
  const int kk = std::min<int>(k, static_cast<int>(train_rows.size()));

  MuHat mu;
  mu.fitted.resize(X.n);
  std::vector<std::pair<double, int>> dist(train_rows.size());
  for (int i = 0; i < X.n; ++i) {
    for (std::size_t t = 0; t < train_rows.size(); ++t) {
      double d2 = 0.0;
      for (int j = 0; j < X.p; ++j) {
        double diff = X.at(i, j) - X.at(train_rows[t], j);
        d2 += diff * diff;
      }
      dist[t] = {d2, train_rows[t]};
    }
    std::nth_element(dist.begin(), dist.begin() + (kk - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + kk);
    double s = 0.0;
    for (int t = 0; t < kk; ++t) s += y[dist[t].second];
    mu.fitted[i] = s / kk;
  }
  return mu;
}

}  // namespace opeid
