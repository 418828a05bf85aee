#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace opeid {

class Rng;

struct CovariateMatrix {
  int n = 0;
  int p = 0;
  std::vector<double> values;  // row-major, n*p

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * p + j]; }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)};
  }

  // Throws InvariantError on non-finite entries or empty dimensions.
  void validate() const;
};

enum class MetricKind { Euclidean, WeightedEuclidean, Hamming, Precomputed };

struct Metric {
  MetricKind kind = MetricKind::Euclidean;
  std::vector<double> weights;  // WeightedEuclidean: length p, nonnegative
  std::vector<double> matrix;   // Precomputed: n*n, row-major
  int matrix_n = 0;

  static Metric euclidean() { return {}; }
  static Metric weighted_euclidean(std::vector<double> w);
  static Metric hamming() { return {MetricKind::Hamming, {}, {}, 0}; }
  static Metric precomputed(std::vector<double> m, int n);

  double distance(const CovariateMatrix& X, int i, int j) const;

  // Symmetry/nonnegativity/zero-diagonal everywhere; triangle inequality on
  // min(n^3, 10000) sampled triples unless full_triangle is set.
  void validate(const CovariateMatrix& X, bool full_triangle = false,
                std::uint64_t seed = 17) const;
};

struct LoggedDataset {
  CovariateMatrix covariates;
  std::vector<double> behavior_prob;  // pi_b for the binarized action, in [0,1]
  std::vector<double> eval_prob;      // pi_e, in [0,1]
  std::vector<std::uint8_t> action_taken;
  std::vector<double> outcome;        // meaningful only where action_taken=1

  int n() const { return covariates.n; }
  bool is_overlap(int i) const { return behavior_prob[i] > 0.0; }
  std::vector<int> overlap_rows() const;
  std::vector<int> no_overlap_rows() const;
  double fraction_no_overlap() const;

  void validate() const;

  // Fingerprint over covariates and the overlap mask; used to detect stale
  // nearest-neighbor indexes.
  std::uint64_t fingerprint() const;
};

struct MuHat {
  std::vector<double> fitted;  // one value per dataset row

  void validate(int n) const;
};

enum class OrderKind { Coordinatewise, SingleCoordinate, Explicit };

struct PartialOrder {
  OrderKind kind = OrderKind::Coordinatewise;
  int coordinate = 0;                         // SingleCoordinate
  std::vector<std::pair<int, int>> pairs;     // Explicit: (i, j) meaning X_i < X_j

  static PartialOrder coordinatewise() { return {}; }
  static PartialOrder single_coordinate(int j);
  static PartialOrder explicit_pairs(std::vector<std::pair<int, int>> ps);

  // True iff X_i strictly precedes X_j. Explicit orders compare via the
  // transitive closure of the pair list.
  bool precedes(const CovariateMatrix& X, int i, int j) const;

  // Irreflexivity, and for explicit lists acyclicity under transitive closure.
  void validate(int n) const;

 private:
  mutable std::vector<std::uint8_t> closure_;  // n*n reachability, built lazily
  mutable int closure_n_ = 0;
  void build_closure(int n) const;
};

struct OutcomeBounds {
  double lower = 0.0;
  double upper = 1.0;
};

struct LipschitzAssumption {
  double L = 0.0;
  Metric metric;
};

// L values at or above this are treated as "no smoothness assumption" and
// dispatch straight to the boundedness-only estimator.
inline constexpr double kLipschitzInfinity = 1e18;
inline constexpr double kLipschitzSentinelThreshold = 1e17;

struct AssumptionSet {
  std::optional<OutcomeBounds> bounds;
  std::optional<LipschitzAssumption> lipschitz;
  std::optional<PartialOrder> monotone;

  bool has_bounds() const { return bounds.has_value(); }
  bool has_lipschitz() const { return lipschitz.has_value(); }
  bool has_monotone() const { return monotone.has_value(); }
  bool lipschitz_is_sentinel() const {
    return lipschitz && lipschitz->L >= kLipschitzSentinelThreshold;
  }

  void validate(int n) const;
};

}  // namespace opeid
