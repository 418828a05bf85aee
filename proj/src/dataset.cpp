#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "errors.hpp"
#include "rng.hpp"

namespace opeid {

void CovariateMatrix::validate() const {
  if (n < 1 || p < 1) throw InvariantError("covariate matrix must have n >= 1 and p >= 1");
  if (values.size() != static_cast<std::size_t>(n) * p)
    throw InvariantError("covariate matrix storage does not match n*p");
  for (std::size_t k = 0; k < values.size(); ++k)
    if (!std::isfinite(values[k]))
      throw InvariantError("covariate matrix has a non-finite entry at flat index " +
                           std::to_string(k));
}

Metric Metric::weighted_euclidean(std::vector<double> w) {
  Metric m;
  m.kind = MetricKind::WeightedEuclidean;
  m.weights = std::move(w);
  return m;
}

Metric Metric::precomputed(std::vector<double> mat, int n) {
  Metric m;
  m.kind = MetricKind::Precomputed;
  m.matrix = std::move(mat);
  m.matrix_n = n;
  return m;
}

double Metric::distance(const CovariateMatrix& X, int i, int j) const {
  switch (kind) {
    case MetricKind::Euclidean: {
      double s = 0.0;
      auto a = X.row(i), b = X.row(j);
      for (int k = 0; k < X.p; ++k) {
        double d = a[k] - b[k];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::WeightedEuclidean: {
      if (static_cast<int>(weights.size()) != X.p)
        throw InvariantError("weighted-euclidean weight vector length does not match p");
      double s = 0.0;
      auto a = X.row(i), b = X.row(j);
      for (int k = 0; k < X.p; ++k) {
        double d = a[k] - b[k];
        s += weights[k] * d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::Hamming: {
      double s = 0.0;
      auto a = X.row(i), b = X.row(j);
      for (int k = 0; k < X.p; ++k)
        if (a[k] != b[k]) s += 1.0;
      return s;
    }
    case MetricKind::Precomputed: {
      if (matrix_n != X.n)
        throw InvariantError("precomputed distance matrix is " + std::to_string(matrix_n) +
                             "x" + std::to_string(matrix_n) + " but dataset has n=" +
                             std::to_string(X.n));
      return matrix[static_cast<std::size_t>(i) * matrix_n + j];
    }
  }
  return 0.0;
}

void Metric::validate(const CovariateMatrix& X, bool full_triangle, std::uint64_t seed) const {
  if (kind == MetricKind::WeightedEuclidean) {
    if (static_cast<int>(weights.size()) != X.p)
      throw InvariantError("weighted-euclidean weight vector length does not match p");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvariantError("weighted-euclidean weights must be finite and nonnegative");
    return;
  }
  if (kind != MetricKind::Precomputed) return;

  const int n = X.n;
  if (matrix_n != n || matrix.size() != static_cast<std::size_t>(n) * n)
    throw InvariantError("precomputed distance matrix shape mismatch");
  for (int i = 0; i < n; ++i) {
    if (matrix[static_cast<std::size_t>(i) * n + i] != 0.0)
      throw InvariantError("precomputed metric has nonzero diagonal at row " + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      double dij = matrix[static_cast<std::size_t>(i) * n + j];
      if (!std::isfinite(dij) || dij < 0.0)
        throw InvariantError("precomputed metric has a negative or non-finite entry");
      if (dij != matrix[static_cast<std::size_t>(j) * n + i])
        throw InvariantError("precomputed metric is not symmetric at (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
    }
  }

  constexpr double kTriangleTol = 1e-12;
  auto d = [&](int i, int j) { return matrix[static_cast<std::size_t>(i) * n + j]; };
  auto check = [&](int i, int j, int k) {
    if (d(i, k) > d(i, j) + d(j, k) + kTriangleTol)
      throw InvariantError("precomputed metric violates the triangle inequality on triple (" +
                           std::to_string(i) + "," + std::to_string(j) + "," +
                           std::to_string(k) + ")");
  };
  if (full_triangle) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) check(i, j, k);
  } else {
    const long long total = static_cast<long long>(n) * n * n;
    const long long samples = std::min<long long>(total, 10000);
    Rng rng(seed);
    for (long long s = 0; s < samples; ++s)
      check(static_cast<int>(rng.index(n)), static_cast<int>(rng.index(n)),
            static_cast<int>(rng.index(n)));
  }
}

std::vector<int> LoggedDataset::overlap_rows() const {
  std::vector<int> rows;
  for (int i = 0; i < n(); ++i)
    if (is_overlap(i)) rows.push_back(i);
  return rows;
}

std::vector<int> LoggedDataset::no_overlap_rows() const {
  std::vector<int> rows;
  for (int i = 0; i < n(); ++i)
    if (!is_overlap(i)) rows.push_back(i);
  return rows;
}

double LoggedDataset::fraction_no_overlap() const {
  int c = 0;
  for (int i = 0; i < n(); ++i)
    if (!is_overlap(i)) ++c;
  return static_cast<double>(c) / n();
}

void LoggedDataset::validate() const {
  covariates.validate();
  const std::size_t nn = static_cast<std::size_t>(n());
  if (behavior_prob.size() != nn || eval_prob.size() != nn || action_taken.size() != nn ||
      outcome.size() != nn)
    throw InvariantError("dataset column lengths do not match n");
  for (int i = 0; i < n(); ++i) {
    if (!(behavior_prob[i] >= 0.0 && behavior_prob[i] <= 1.0))
      throw InvariantError("behavior probability out of [0,1] at row " + std::to_string(i));
    if (!(eval_prob[i] >= 0.0 && eval_prob[i] <= 1.0))
      throw InvariantError("evaluation probability out of [0,1] at row " + std::to_string(i));
    if (action_taken[i] != 0 && action_taken[i] != 1)
      throw InvariantError("action indicator must be 0 or 1 at row " + std::to_string(i));
    if (action_taken[i] == 1) {
      if (behavior_prob[i] == 0.0)
        throw InvariantError("row " + std::to_string(i) +
                             " has action_taken=1 but behavior probability 0");
      if (!std::isfinite(outcome[i]))
        throw InvariantError("row " + std::to_string(i) + " has a non-finite observed outcome");
    }
  }
}

std::uint64_t LoggedDataset::fingerprint() const {
  // FNV-1a over covariate bytes and the overlap mask.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&](const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 0x100000001b3ULL;
    }
  };
  mix_bytes(covariates.values.data(), covariates.values.size() * sizeof(double));
  for (int i = 0; i < n(); ++i) {
    unsigned char m = is_overlap(i) ? 1 : 0;
    mix_bytes(&m, 1);
  }
  return h;
}

void MuHat::validate(int n) const {
  if (fitted.size() != static_cast<std::size_t>(n))
    throw InvariantError("mu-hat vector length does not match dataset n");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(fitted[i]))
      throw InvariantError("mu-hat has a non-finite value at row " + std::to_string(i));
}

PartialOrder PartialOrder::single_coordinate(int j) {
  PartialOrder o;
  o.kind = OrderKind::SingleCoordinate;
  o.coordinate = j;
  return o;
}

PartialOrder PartialOrder::explicit_pairs(std::vector<std::pair<int, int>> ps) {
  PartialOrder o;
  o.kind = OrderKind::Explicit;
  o.pairs = std::move(ps);
  return o;
}

void PartialOrder::build_closure(int n) const {
  closure_.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw InvariantError("explicit order pair references a row outside the dataset");
    closure_[static_cast<std::size_t>(i) * n + j] = 1;
  }
  // Floyd-Warshall reachability.
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!closure_[static_cast<std::size_t>(i) * n + k]) continue;
      for (int j = 0; j < n; ++j)
        if (closure_[static_cast<std::size_t>(k) * n + j])
          closure_[static_cast<std::size_t>(i) * n + j] = 1;
    }
  closure_n_ = n;
}

bool PartialOrder::precedes(const CovariateMatrix& X, int i, int j) const {
  if (i == j) return false;
  switch (kind) {
    case OrderKind::Coordinatewise: {
      auto a = X.row(i), b = X.row(j);
      bool strict = false;
      for (int k = 0; k < X.p; ++k) {
        if (a[k] > b[k]) return false;
        if (a[k] < b[k]) strict = true;
      }
      return strict;
    }
    case OrderKind::SingleCoordinate:
      return X.at(i, coordinate) < X.at(j, coordinate);
    case OrderKind::Explicit: {
      if (closure_n_ != X.n) build_closure(X.n);
      return closure_[static_cast<std::size_t>(i) * X.n + j] != 0;
    }
  }
  return false;
}

void PartialOrder::validate(int n) const {
  if (kind == OrderKind::SingleCoordinate && coordinate < 0)
    throw InvariantError("single-coordinate order index must be nonnegative");
  if (kind == OrderKind::Explicit) {
    build_closure(n);
    for (int i = 0; i < n; ++i)
      if (closure_[static_cast<std::size_t>(i) * n + i])
        throw InvariantError("explicit order is cyclic: row " + std::to_string(i) +
                             " precedes itself under transitive closure");
  }
}

void AssumptionSet::validate(int n) const {
  if (!bounds && !lipschitz && !monotone)
    throw InvariantError("assumption set must assert at least one assumption");
  if (bounds && !(bounds->lower <= bounds->upper))
    throw InvariantError("outcome bounds must satisfy lower <= upper");
  if (lipschitz && !(lipschitz->L >= 0.0))
    throw InvariantError("Lipschitz constant must be nonnegative");
  if (monotone) monotone->validate(n);
}

}  // namespace opeid
