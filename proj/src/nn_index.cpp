#include "nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace opeid {

namespace {

// kd-tree over overlap points, coordinates optionally pre-scaled.
class KdTree {
 public:
  KdTree(const CovariateMatrix& X, std::vector<int> points) : X_(X), idx_(std::move(points)) {
    nodes_.reserve(idx_.size());
    root_ = build(0, static_cast<int>(idx_.size()), 0);
  }

  // Returns (squared distance, row index); ties resolved to the lowest row.
  std::pair<double, int> nearest(std::span<const double> q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    int best = -1;
    search(root_, q, best_d2, best);
    return {best_d2, best};
  }

 private:
  struct Node {
    int point;  // row index
    int axis;
    int left = -1, right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    int axis = depth % X_.p;
    int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) {
                       double va = X_.at(a, axis), vb = X_.at(b, axis);
                       return va < vb || (va == vb && a < b);
                     });
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({idx_[mid], axis, -1, -1});
    // Recurse before touching nodes_[id]; the vector may reallocate.
    int left = build(lo, mid, depth + 1);
    int right = build(mid + 1, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(int node, std::span<const double> q, double& best_d2, int& best) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    double d2 = 0.0;
    auto row = X_.row(nd.point);
    for (int k = 0; k < X_.p; ++k) {
      double diff = q[k] - row[k];
      d2 += diff * diff;
    }
    if (d2 < best_d2 || (d2 == best_d2 && nd.point < best)) {
      best_d2 = d2;
      best = nd.point;
    }
    double split = X_.at(nd.point, nd.axis);
    double delta = q[nd.axis] - split;
    int near = delta < 0 ? nd.left : nd.right;
    int far = delta < 0 ? nd.right : nd.left;
    search(near, q, best_d2, best);
    if (delta * delta <= best_d2) search(far, q, best_d2, best);
  }

  const CovariateMatrix& X_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

NnIndex build_nn_index(const LoggedDataset& data, const MuHat& mu, const Metric& metric) {
  mu.validate(data.n());
  const auto overlap = data.overlap_rows();
  if (overlap.empty())
    throw InvariantError("cannot build a nearest-neighbor index with an empty overlap region");

  NnIndex index;
  index.rows = data.no_overlap_rows();
  index.neighbor.resize(index.rows.size());
  index.dist.resize(index.rows.size());
  index.mu_at_neighbor.resize(index.rows.size());
  index.dataset_fingerprint = data.fingerprint();

  const auto& X = data.covariates;
  const bool tree_path = metric.kind == MetricKind::Euclidean && X.p <= 16;

  if (tree_path) {
    KdTree tree(X, overlap);
    for (std::size_t k = 0; k < index.rows.size(); ++k) {
      auto [d2, j] = tree.nearest(X.row(index.rows[k]));
      index.neighbor[k] = j;
      index.dist[k] = metric.distance(X, index.rows[k], j);
      index.mu_at_neighbor[k] = mu.fitted[j];
    }
  } else {
    for (std::size_t k = 0; k < index.rows.size(); ++k) {
      const int i = index.rows[k];
      double best = std::numeric_limits<double>::infinity();
      int best_j = -1;
      for (int j : overlap) {
        double d = metric.distance(X, i, j);
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      index.neighbor[k] = best_j;
      index.dist[k] = best;
      index.mu_at_neighbor[k] = mu.fitted[best_j];
    }
  }
  return index;
}

UnidentifiedBounds conservative_bounds(const NnIndex& index, const LoggedDataset& data,
                                       const MuHat& mu, double L,
                                       std::optional<OutcomeBounds> bounds) {
  if (index.dataset_fingerprint != data.fingerprint())
    throw InvariantError("stale nearest-neighbor index: dataset fingerprint mismatch");
  mu.validate(data.n());

  UnidentifiedBounds out;
  out.method = BoundMethod::ConservativeNn;
  out.rows = index.rows;
  out.per_point_lower.resize(index.rows.size());
  out.per_point_upper.resize(index.rows.size());
  out.arg_lower = index.neighbor;
  out.arg_upper = index.neighbor;

  const double lo = bounds ? bounds->lower : -std::numeric_limits<double>::infinity();
  const double hi = bounds ? bounds->upper : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < index.rows.size(); ++k) {
    double below = index.mu_at_neighbor[k] - L * index.dist[k];
    double above = index.mu_at_neighbor[k] + L * index.dist[k];
    out.per_point_lower[k] = std::max(lo, below);
    out.per_point_upper[k] = std::min(hi, above);
    if (out.per_point_lower[k] == lo && below < lo) out.arg_lower[k] = -1;
    if (out.per_point_upper[k] == hi && above > hi) out.arg_upper[k] = -1;
  }

  double lsum = 0.0, lc = 0.0, usum = 0.0, uc = 0.0;
  for (std::size_t k = 0; k < index.rows.size(); ++k) {
    double w = data.eval_prob[index.rows[k]];
    if (w == 0.0) continue;
    double y = w * out.per_point_lower[k] - lc;
    double t = lsum + y;
    lc = (t - lsum) - y;
    lsum = t;
    y = w * out.per_point_upper[k] - uc;
    t = usum + y;
    uc = (t - usum) - y;
    usum = t;
  }
  out.lower = lsum / data.n();
  out.upper = usum / data.n();
  return out;
}

}  // namespace opeid
