#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "solver.hpp"

namespace opeid {

namespace {

double per_point_variance(const LoggedDataset& data, const UnidentifiedBounds& psi2) {
  // Variance of the per-row term pi_e * (bracket) * 1{no overlap}, zeros on
  // overlap rows included.
  const int n = data.n();
  if (n < 2) return 0.0;
  double mean = 0.0;
  std::vector<double> terms(n, 0.0);
  for (std::size_t k = 0; k < psi2.rows.size(); ++k) {
    double v = data.eval_prob[psi2.rows[k]] * psi2.per_point_lower[k];
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    terms[psi2.rows[k]] = v;
  }
  for (double v : terms) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : terms) ss += (v - mean) * (v - mean);
  return ss / (n - 1);
}

MuHat clamp_overlap(const LoggedDataset& data, const MuHat& mu, const OutcomeBounds& box) {
  MuHat out = mu;
  for (int i = 0; i < data.n(); ++i)
    if (data.is_overlap(i))
      out.fitted[i] = std::clamp(out.fitted[i], box.lower, box.upper);
  return out;
}

void enforce_box_on_mu(const LoggedDataset& data, const MuHat& mu, const OutcomeBounds& box) {
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_overlap(i)) continue;
    double v = mu.fitted[i];
    if (v < box.lower - kFeasibilityTol || v > box.upper + kFeasibilityTol)
      throw InvariantError("fitted value " + std::to_string(v) + " at overlap row " +
                           std::to_string(i) +
                           " lies outside the asserted outcome bounds; rerun with clamping "
                           "enabled if this is intended");
  }
}

BoundResult assemble(const LoggedDataset& data, IdentifiedEstimate psi_id,
                     UnidentifiedBounds psi2, FeasibilityReport feasibility) {
  BoundResult r;
  r.psi_id = psi_id;
  r.lower = psi_id.value + psi2.lower;
  r.upper = psi_id.value + psi2.upper;
  r.method_used = to_string(psi2.method);
  if (psi2.manski_fallback) r.method_used += "+manski-fallback";
  r.feasibility = std::move(feasibility);
  r.fraction_no_overlap = data.fraction_no_overlap();
  r.empty_overlap = psi_id.n_overlap == 0;
  r.per_point_lower_variance = per_point_variance(data, psi2);
  r.psi2 = std::move(psi2);
  return r;
}

UnidentifiedBounds propagation_bounds(const LoggedDataset& data, const MuHat& mu,
                                      const AssumptionSet& assumptions) {
  auto sys = ConstraintSystem::from_assumptions(data, mu, assumptions);
  auto lo = solve_min(sys);
  auto hi = solve_max(sys);
  if (lo.status == LpStatus::Infeasible || hi.status == LpStatus::Infeasible)
    throw InfeasibleError("assumption set infeasible under propagation: " +
                              (lo.status == LpStatus::Infeasible ? lo.witness : hi.witness),
                          0.0);

  UnidentifiedBounds out;
  out.method = BoundMethod::Propagation;
  out.rows = data.no_overlap_rows();
  out.per_point_lower.reserve(out.rows.size());
  out.per_point_upper.reserve(out.rows.size());
  out.arg_lower.assign(out.rows.size(), -1);
  out.arg_upper.assign(out.rows.size(), -1);
  for (int i : out.rows) {
    out.per_point_lower.push_back(lo.t[i]);
    out.per_point_upper.push_back(hi.t[i]);
  }
  out.lower = lo.status == LpStatus::Unbounded ? -std::numeric_limits<double>::infinity()
                                               : lo.objective;
  out.upper = hi.status == LpStatus::Unbounded ? std::numeric_limits<double>::infinity()
                                               : hi.objective;
  return out;
}

}  // namespace

BoundResult evaluate(const LoggedDataset& data, const MuHat& mu,
                     const AssumptionSet& assumptions, const EvaluateOptions& options) {
  data.validate();
  assumptions.validate(data.n());

  const bool lipschitz = assumptions.has_lipschitz() && !assumptions.lipschitz_is_sentinel();
  const bool monotone = assumptions.has_monotone();
  const bool reads_mu = lipschitz || monotone;

  if (assumptions.lipschitz)
    assumptions.lipschitz->metric.validate(data.covariates, options.full_triangle_check);

  MuHat mu_eff = mu;
  if (reads_mu) {
    mu.validate(data.n());
    if (assumptions.bounds) {
      if (options.clamp_mu)
        mu_eff = clamp_overlap(data, mu, *assumptions.bounds);
      else
        enforce_box_on_mu(data, mu, *assumptions.bounds);
    }
  }

  auto psi_id = estimate_identified(data, options.estimator);
  auto feasibility = reads_mu ? check_feasibility(data, mu_eff, assumptions)
                              : FeasibilityReport{};

  UnidentifiedBounds psi2;
  if (lipschitz && monotone) {
    // No-interaction fails under this combination; closed forms are refused
    // and the generic solver is the only exact path.
    if (!feasibility.feasible)
      throw InfeasibleError("assumption set infeasible: " + feasibility.violation +
                                "; data requires L >= " +
                                std::to_string(feasibility.max_lipschitz_ratio),
                            feasibility.max_lipschitz_ratio);
    psi2 = propagation_bounds(data, mu_eff, assumptions);
  } else if (lipschitz) {
    if (options.conservative && !data.overlap_rows().empty()) {
      if (!feasibility.feasible)
        throw InfeasibleError("Lipschitz assumption infeasible; data requires L >= " +
                                  std::to_string(feasibility.max_lipschitz_ratio),
                              feasibility.max_lipschitz_ratio);
      auto index = build_nn_index(data, mu_eff, assumptions.lipschitz->metric);
      psi2 = conservative_bounds(index, data, mu_eff, assumptions.lipschitz->L,
                                 assumptions.bounds);
    } else {
      psi2 = lipschitz_bounds(data, mu_eff, assumptions.lipschitz->L,
                              assumptions.lipschitz->metric, assumptions.bounds);
    }
  } else if (monotone) {
    const double lo = assumptions.bounds ? assumptions.bounds->lower
                                         : -std::numeric_limits<double>::infinity();
    const double hi = assumptions.bounds ? assumptions.bounds->upper
                                         : std::numeric_limits<double>::infinity();
    psi2 = monotone_bounds(data, mu_eff, *assumptions.monotone, lo, hi);
  } else {
    // Bounded only, or a sentinel L: pure Manski.
    if (!assumptions.bounds)
      throw InvariantError("sentinel L without outcome bounds leaves psi2 unbounded");
    psi2 = manski_bounds(data, assumptions.bounds->lower, assumptions.bounds->upper);
  }

  return assemble(data, psi_id, std::move(psi2), std::move(feasibility));
}

MultiActionResult evaluate_multi_action(const std::vector<LoggedDataset>& datasets,
                                        const std::vector<MuHat>& mus,
                                        const std::vector<AssumptionSet>& assumptions,
                                        const EvaluateOptions& options) {
  if (datasets.empty()) throw InvariantError("multi-action evaluation needs at least one action");
  if (mus.size() != datasets.size() || assumptions.size() != datasets.size())
    throw InvariantError("per-action inputs must have one entry per action");
  const int n = datasets[0].n();
  for (const auto& d : datasets)
    if (d.n() != n) throw InvariantError("all per-action datasets must share n");

  MultiActionResult out;
  out.per_action.reserve(datasets.size());
  for (std::size_t a = 0; a < datasets.size(); ++a)
    out.per_action.push_back(evaluate(datasets[a], mus[a], assumptions[a], options));
  for (const auto& r : out.per_action) {
    out.lower += r.lower;
    out.upper += r.upper;
  }
  return out;
}

namespace {

struct LipschitzCache {
  std::vector<int> no_rows, ov_rows;
  std::vector<double> dist;   // no x ov, row-major; empty when not cached
  std::vector<double> mu_ov;  // fitted values at overlap rows
  double l_min_tol = 0.0;     // smallest L feasible within tolerance
  double max_ratio = 0.0;
  bool has_ratio = false;
  bool coincident_violation = false;
  int worst_i = -1, worst_j = -1;
};

LipschitzCache build_cache(const LoggedDataset& data, const MuHat& mu, const Metric& metric) {
  LipschitzCache cache;
  cache.no_rows = data.no_overlap_rows();
  cache.ov_rows = data.overlap_rows();
  const auto& X = data.covariates;
  cache.mu_ov.reserve(cache.ov_rows.size());
  for (int j : cache.ov_rows) cache.mu_ov.push_back(mu.fitted[j]);

  for (std::size_t a = 0; a < cache.ov_rows.size(); ++a)
    for (std::size_t b = a + 1; b < cache.ov_rows.size(); ++b) {
      int i = cache.ov_rows[a], j = cache.ov_rows[b];
      double d = metric.distance(X, i, j);
      double gap = std::abs(mu.fitted[i] - mu.fitted[j]);
      if (d > 0.0) {
        double ratio = gap / d;
        if (!cache.has_ratio || ratio > cache.max_ratio) {
          cache.max_ratio = ratio;
          cache.has_ratio = true;
          cache.worst_i = i;
          cache.worst_j = j;
        }
        cache.l_min_tol = std::max(cache.l_min_tol, (gap - kFeasibilityTol) / d);
      } else if (gap > kFeasibilityTol) {
        cache.coincident_violation = true;
        cache.worst_i = i;
        cache.worst_j = j;
      }
    }

  const std::size_t cells = cache.no_rows.size() * cache.ov_rows.size();
  if (cells > 0 && cells <= 20'000'000) {
    cache.dist.resize(cells);
    for (std::size_t k = 0; k < cache.no_rows.size(); ++k)
      for (std::size_t c = 0; c < cache.ov_rows.size(); ++c)
        cache.dist[k * cache.ov_rows.size() + c] =
            metric.distance(X, cache.no_rows[k], cache.ov_rows[c]);
  }
  return cache;
}

UnidentifiedBounds lipschitz_from_cache(const LoggedDataset& data, const LipschitzCache& cache,
                                        const Metric& metric, double L,
                                        std::optional<OutcomeBounds> bounds) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double pos_inf = std::numeric_limits<double>::infinity();
  const double lo = bounds ? bounds->lower : neg_inf;
  const double hi = bounds ? bounds->upper : pos_inf;
  const auto& X = data.covariates;

  UnidentifiedBounds out;
  out.method = bounds ? BoundMethod::LipschitzBounded : BoundMethod::Lipschitz;
  out.rows = cache.no_rows;
  out.per_point_lower.resize(out.rows.size());
  out.per_point_upper.resize(out.rows.size());
  out.arg_lower.assign(out.rows.size(), -1);
  out.arg_upper.assign(out.rows.size(), -1);

  const std::size_t n_ov = cache.ov_rows.size();
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    double best_lo = neg_inf, best_hi = pos_inf;
    int arg_lo = -1, arg_hi = -1;
    for (std::size_t c = 0; c < n_ov; ++c) {
      double d = cache.dist.empty() ? metric.distance(X, out.rows[k], cache.ov_rows[c])
                                    : cache.dist[k * n_ov + c];
      double cand_lo = cache.mu_ov[c] - L * d;
      double cand_hi = cache.mu_ov[c] + L * d;
      if (cand_lo > best_lo) {
        best_lo = cand_lo;
        arg_lo = cache.ov_rows[c];
      }
      if (cand_hi < best_hi) {
        best_hi = cand_hi;
        arg_hi = cache.ov_rows[c];
      }
    }
    if (best_lo < lo) {
      best_lo = lo;
      arg_lo = -1;
    }
    if (best_hi > hi) {
      best_hi = hi;
      arg_hi = -1;
    }
    out.per_point_lower[k] = best_lo;
    out.per_point_upper[k] = best_hi;
    out.arg_lower[k] = arg_lo;
    out.arg_upper[k] = arg_hi;
  }

  double lsum = 0.0, lc = 0.0, usum = 0.0, uc = 0.0;
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    double w = data.eval_prob[out.rows[k]];
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

void check_nesting(const SweepResult& sweep) {
  constexpr double tol = 1e-12;
  const SweepCell* prev = nullptr;
  for (const auto& cell : sweep.cells) {
    if (!cell.feasible || !cell.result) continue;
    if (prev) {
      if (prev->result->lower < cell.result->lower - tol ||
          prev->result->upper > cell.result->upper + tol)
        throw InvariantError("sweep nesting violated between L=" + std::to_string(prev->L) +
                             " and L=" + std::to_string(cell.L));
    }
    prev = &cell;
  }
}

}  // namespace

SweepResult sweep_L(const LoggedDataset& data, const MuHat& mu,
                    const AssumptionSet& base_assumptions, const std::vector<double>& L_grid,
                    const EvaluateOptions& options) {
  if (L_grid.empty()) throw InvariantError("L grid must be nonempty");
  if (!std::is_sorted(L_grid.begin(), L_grid.end()))
    throw InvariantError("L grid must be sorted ascending");
  if (!base_assumptions.has_lipschitz())
    throw InvariantError("sweep requires a Lipschitz assumption in the base assumption set");

  SweepResult sweep;
  sweep.cells.reserve(L_grid.size());

  auto run_cell = [&](double L) {
    SweepCell cell;
    cell.L = L;
    AssumptionSet assumptions = base_assumptions;
    assumptions.lipschitz->L = L;
    try {
      cell.result = evaluate(data, mu, assumptions, options);
      cell.feasible = true;
      cell.l_lower_bound = cell.result->feasibility.max_lipschitz_ratio;
    } catch (const InfeasibleError& e) {
      cell.feasible = false;
      cell.infeasible_reason = e.what();
      cell.l_lower_bound = e.l_lower_bound;
    }
    sweep.cells.push_back(std::move(cell));
  };

  const bool fast_path = !base_assumptions.has_monotone() && !options.conservative &&
                         !data.overlap_rows().empty();
  if (!fast_path) {
    // Conservative mode reuses its index implicitly L-to-L via evaluate; to
    // honor single-build reuse we special-case it below.
    if (options.conservative && !base_assumptions.has_monotone() &&
        !data.overlap_rows().empty()) {
      data.validate();
      MuHat mu_eff = mu;
      if (base_assumptions.bounds) {
        if (options.clamp_mu)
          mu_eff = clamp_overlap(data, mu, *base_assumptions.bounds);
        else
          enforce_box_on_mu(data, mu, *base_assumptions.bounds);
      }
      const Metric& metric = base_assumptions.lipschitz->metric;
      metric.validate(data.covariates, options.full_triangle_check);
      auto index = build_nn_index(data, mu_eff, metric);
      auto psi_id = estimate_identified(data, options.estimator);
      AssumptionSet probe = base_assumptions;
      auto feas_base = check_feasibility(data, mu_eff, probe);
      for (double L : L_grid) {
        SweepCell cell;
        cell.L = L;
        cell.l_lower_bound = feas_base.max_lipschitz_ratio;
        AssumptionSet assumptions = base_assumptions;
        assumptions.lipschitz->L = L;
        if (L >= kLipschitzSentinelThreshold) {
          if (!base_assumptions.bounds) {
            cell.infeasible_reason = "sentinel L without outcome bounds leaves psi2 unbounded";
            sweep.cells.push_back(std::move(cell));
            continue;
          }
          auto psi2 =
              manski_bounds(data, base_assumptions.bounds->lower, base_assumptions.bounds->upper);
          cell.result = assemble(data, psi_id, std::move(psi2), feas_base);
          cell.feasible = true;
          sweep.cells.push_back(std::move(cell));
          continue;
        }
        auto feas = check_feasibility(data, mu_eff, assumptions);
        if (!feas.feasible) {
          cell.feasible = false;
          cell.infeasible_reason = "Lipschitz assumption infeasible at L=" + std::to_string(L) +
                                   "; data requires L >= " +
                                   std::to_string(feas.max_lipschitz_ratio);
          sweep.cells.push_back(std::move(cell));
          continue;
        }
        auto psi2 = conservative_bounds(index, data, mu_eff, L, base_assumptions.bounds);
        cell.result = assemble(data, psi_id, std::move(psi2), std::move(feas));
        cell.feasible = true;
        sweep.cells.push_back(std::move(cell));
      }
      check_nesting(sweep);
      return sweep;
    }
    for (double L : L_grid) run_cell(L);
    check_nesting(sweep);
    return sweep;
  }

  // Exact pure-Lipschitz path: one distance pass shared across the grid.
  data.validate();
  MuHat mu_eff = mu;
  if (base_assumptions.bounds) {
    if (options.clamp_mu)
      mu_eff = clamp_overlap(data, mu, *base_assumptions.bounds);
    else
      enforce_box_on_mu(data, mu, *base_assumptions.bounds);
  }
  const Metric& metric = base_assumptions.lipschitz->metric;
  metric.validate(data.covariates, options.full_triangle_check);
  auto cache = build_cache(data, mu_eff, metric);
  auto psi_id = estimate_identified(data, options.estimator);

  for (double L : L_grid) {
    SweepCell cell;
    cell.L = L;
    cell.l_lower_bound = cache.max_ratio;
    AssumptionSet assumptions = base_assumptions;
    assumptions.lipschitz->L = L;

    FeasibilityReport feas;
    feas.max_lipschitz_ratio = cache.max_ratio;
    feas.has_ratio = cache.has_ratio;
    if (cache.coincident_violation) {
      feas.feasible = false;
      feas.worst_i = cache.worst_i;
      feas.worst_j = cache.worst_j;
      feas.violation = "coincident overlap points with different fitted values";
    }

    if (L >= kLipschitzSentinelThreshold) {
      if (!base_assumptions.bounds) {
        cell.infeasible_reason = "sentinel L without outcome bounds leaves psi2 unbounded";
        sweep.cells.push_back(std::move(cell));
        continue;
      }
      auto psi2 =
          manski_bounds(data, base_assumptions.bounds->lower, base_assumptions.bounds->upper);
      cell.result = assemble(data, psi_id, std::move(psi2), feas);
      cell.feasible = true;
      sweep.cells.push_back(std::move(cell));
      continue;
    }

    if (cache.coincident_violation || L < cache.l_min_tol) {
      cell.feasible = false;
      cell.infeasible_reason =
          cache.coincident_violation
              ? "coincident overlap points with different fitted values"
              : "Lipschitz assumption infeasible at L=" + std::to_string(L) +
                    "; data requires L >= " + std::to_string(cache.max_ratio);
      sweep.cells.push_back(std::move(cell));
      continue;
    }

    auto psi2 = lipschitz_from_cache(data, cache, metric, L, base_assumptions.bounds);
    cell.result = assemble(data, psi_id, std::move(psi2), feas);
    cell.feasible = true;
    sweep.cells.push_back(std::move(cell));
  }

  check_nesting(sweep);
  return sweep;
}

}  // namespace opeid
