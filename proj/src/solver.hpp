#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace opeid {

// Difference-constraint system over n node values t_0..t_{n-1}.
// An edge (i, j, c) encodes t_i - t_j <= c. Overlap rows are pinned to their
// fitted values; an optional box applies to every node.
struct ConstraintSystem {
  int n = 0;
  std::map<int, double> pinned;
  struct Edge {
    int i, j;
    double c;
  };
  std::vector<Edge> edges;
  std::optional<OutcomeBounds> box;
  std::vector<double> objective_weights;  // nonnegative, one per node

  void validate() const;

  // Pins, Lipschitz edges (both directions per pair, between every pinned-
  // unpinned and unpinned-unpinned pair), monotone edges, box, and the
  // pi_e/n objective over no-overlap rows.
  static ConstraintSystem from_assumptions(const LoggedDataset& data, const MuHat& mu,
                                           const AssumptionSet& assumptions);

  // Node/pin/edge triples in a line-oriented text format for inspection.
  std::string dump() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  std::vector<double> t;  // pointwise-extremal feasible values
  double objective = 0.0;
  LpStatus status = LpStatus::Optimal;
  int rounds = 0;             // relaxation rounds until fixpoint
  std::string witness;        // violated pin/box description when infeasible
  std::vector<int> unbounded_nodes;  // nodes stuck at the infinite sentinel
};

// Pointwise-minimal feasible t, which minimizes any nonnegative-weighted
// objective. Fixpoint relaxation, at most n rounds on feasible systems.
LpSolution solve_min(const ConstraintSystem& sys);
// Mirror: pointwise-maximal feasible t.
LpSolution solve_max(const ConstraintSystem& sys);

}  // namespace opeid
