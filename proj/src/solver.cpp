#include "solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "feasibility.hpp"

namespace opeid {

void ConstraintSystem::validate() const {
  if (n < 1) throw InvariantError("constraint system must have at least one node");
  for (const auto& [node, value] : pinned) {
    if (node < 0 || node >= n) throw InvariantError("pinned node index out of range");
    if (!std::isfinite(value)) throw InvariantError("pinned value must be finite");
  }
  for (const auto& e : edges) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
      throw InvariantError("edge references a node out of range");
    if (!std::isfinite(e.c)) throw InvariantError("edge cost must be finite");
  }
  if (objective_weights.size() != static_cast<std::size_t>(n))
    throw InvariantError("objective weight vector length does not match node count");
  for (double w : objective_weights)
    if (!(w >= 0.0)) throw InvariantError("objective weights must be nonnegative");
}

ConstraintSystem ConstraintSystem::from_assumptions(const LoggedDataset& data, const MuHat& mu,
                                                    const AssumptionSet& assumptions) {
  ConstraintSystem sys;
  sys.n = data.n();
  sys.box = assumptions.bounds;
  sys.objective_weights.assign(sys.n, 0.0);
  const auto& X = data.covariates;

  for (int i = 0; i < sys.n; ++i) {
    if (data.is_overlap(i))
      sys.pinned[i] = mu.fitted[i];
    else
      sys.objective_weights[i] = data.eval_prob[i] / sys.n;
  }

  // Lipschitz constraints between overlap pairs are implied by the pins and
  // checked separately, so only pairs touching the no-overlap region are
  // materialized.
  if (assumptions.lipschitz && !assumptions.lipschitz_is_sentinel()) {
    const double L = assumptions.lipschitz->L;
    const Metric& metric = assumptions.lipschitz->metric;
    for (int i = 0; i < sys.n; ++i)
      for (int j = i + 1; j < sys.n; ++j) {
        if (data.is_overlap(i) && data.is_overlap(j)) continue;
        double c = L * metric.distance(X, i, j);
        sys.edges.push_back({i, j, c});
        sys.edges.push_back({j, i, c});
      }
  }

  if (assumptions.monotone) {
    const PartialOrder& order = *assumptions.monotone;
    for (int i = 0; i < sys.n; ++i)
      for (int j = 0; j < sys.n; ++j) {
        if (i == j) continue;
        if (data.is_overlap(i) && data.is_overlap(j)) continue;
        if (order.precedes(X, i, j)) sys.edges.push_back({i, j, 0.0});
      }
  }

  return sys;
}

std::string ConstraintSystem::dump() const {
  std::ostringstream os;
  os << "nodes " << n << "\n";
  if (box) os << "box " << box->lower << " " << box->upper << "\n";
  for (const auto& [node, value] : pinned) os << "pin " << node << " " << value << "\n";
  for (const auto& e : edges) os << "edge " << e.i << " " << e.j << " " << e.c << "\n";
  for (int i = 0; i < n; ++i)
    if (objective_weights[i] != 0.0) os << "weight " << i << " " << objective_weights[i] << "\n";
  return os.str();
}

namespace {

constexpr double kTol = 1e-9;

double weighted_objective(const ConstraintSystem& sys, const std::vector<double>& t) {
  double sum = 0.0, c = 0.0;
  for (int i = 0; i < sys.n; ++i) {
    double w = sys.objective_weights[i];
    if (w == 0.0) continue;
    double y = w * t[i] - c;
    double s = sum + y;
    c = (s - sum) - y;
    sum = s;
  }
  return sum;
}

LpSolution solve_impl(const ConstraintSystem& sys, bool minimize) {
  sys.validate();
  const double inf = std::numeric_limits<double>::infinity();
  LpSolution sol;
  sol.t.assign(sys.n, 0.0);

  // For solve_min we track the greatest lower bound per node and relax
  // t_j >= t_i - c along each edge (i, j, c); for solve_max the mirror.
  for (int i = 0; i < sys.n; ++i) {
    auto pin = sys.pinned.find(i);
    if (pin != sys.pinned.end())
      sol.t[i] = pin->second;
    else if (sys.box)
      sol.t[i] = minimize ? sys.box->lower : sys.box->upper;
    else
      sol.t[i] = minimize ? -inf : inf;
  }

  auto fail = [&](std::string witness) {
    sol.status = LpStatus::Infeasible;
    sol.witness = std::move(witness);
    sol.objective = 0.0;
    return sol;
  };

  if (sys.box)
    for (const auto& [node, value] : sys.pinned)
      if (value < sys.box->lower - kTol || value > sys.box->upper + kTol)
        return fail("pinned node " + std::to_string(node) + " lies outside the box");

  bool changed = true;
  int round = 0;
  while (changed) {
    changed = false;
    ++round;
    for (const auto& e : sys.edges) {
      // t_i - t_j <= c
      if (minimize) {
        double bound = sol.t[e.i] - e.c;  // lower bound on t_j
        if (bound <= sol.t[e.j]) continue;
        auto pin = sys.pinned.find(e.j);
        if (pin != sys.pinned.end()) {
          if (bound > pin->second + kTol)
            return fail("pinned node " + std::to_string(e.j) + " requires value >= " +
                        std::to_string(bound) + " but is pinned at " +
                        std::to_string(pin->second));
          continue;
        }
        if (sys.box && bound > sys.box->upper + kTol)
          return fail("node " + std::to_string(e.j) + " forced above the upper box bound");
        sol.t[e.j] = bound;
        changed = true;
      } else {
        double bound = sol.t[e.j] + e.c;  // upper bound on t_i
        if (bound >= sol.t[e.i]) continue;
        auto pin = sys.pinned.find(e.i);
        if (pin != sys.pinned.end()) {
          if (bound < pin->second - kTol)
            return fail("pinned node " + std::to_string(e.i) + " requires value <= " +
                        std::to_string(bound) + " but is pinned at " +
                        std::to_string(pin->second));
          continue;
        }
        if (sys.box && bound < sys.box->lower - kTol)
          return fail("node " + std::to_string(e.i) + " forced below the lower box bound");
        sol.t[e.i] = bound;
        changed = true;
      }
    }
    if (changed && round > sys.n)
      return fail("no fixpoint after n relaxation rounds: contradictory constraint cycle");
  }
  sol.rounds = round;

  for (int i = 0; i < sys.n; ++i)
    if (std::isinf(sol.t[i]) && sys.objective_weights[i] > 0.0) sol.unbounded_nodes.push_back(i);
  if (!sol.unbounded_nodes.empty()) {
    sol.status = LpStatus::Unbounded;
    sol.objective = minimize ? -inf : inf;
    return sol;
  }

  sol.status = LpStatus::Optimal;
  sol.objective = weighted_objective(sys, sol.t);
  return sol;
}

}  // namespace

LpSolution solve_min(const ConstraintSystem& sys) { return solve_impl(sys, true); }
LpSolution solve_max(const ConstraintSystem& sys) { return solve_impl(sys, false); }

}  // namespace opeid
