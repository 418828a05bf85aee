#include <doctest.h>

#include <cmath>

#include "engine.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace opeid;
using opeid::testing::make_dataset;

namespace {

AssumptionSet lipschitz_box(double L, double lo = 0.0, double hi = 1.0) {
  AssumptionSet a;
  a.bounds = OutcomeBounds{lo, hi};
  a.lipschitz = LipschitzAssumption{L, Metric::euclidean()};
  return a;
}

}  // namespace

TEST_CASE("bounded-only evaluation composes psi_id with the manski interval") {
  auto d = make_dataset(1, {0, 1, 2, 3}, {0.5, 0.5, 0.0, 0.0}, {1.0, 1.0, 0.5, 1.0},
                        {1, 0, 0, 0}, {1.0, 0, 0, 0});
  MuHat mu{{0, 0, 0, 0}};
  AssumptionSet a;
  a.bounds = OutcomeBounds{0.0, 1.0};
  EvaluateOptions opt;
  opt.estimator = EstimatorKind::Ipw;
  auto r = evaluate(d, mu, a, opt);
  double psi_id = 1.0 * (1.0 / 0.5) / 4;  // 0.5
  CHECK(r.psi_id.value == doctest::Approx(psi_id));
  CHECK(r.lower == doctest::Approx(psi_id + 0.0));
  CHECK(r.upper == doctest::Approx(psi_id + 0.375));
  CHECK(r.method_used == "manski");
  CHECK(r.fraction_no_overlap == doctest::Approx(0.5));
  // Interval arithmetic identity: width equals the psi2 width exactly.
  CHECK(r.upper - r.lower == r.psi2.upper - r.psi2.lower);
}

TEST_CASE("router: lipschitz+monotone always goes through propagation") {
  auto d = make_dataset(2, {0.0, 0.0, 1.0, 1.0, 1.2, -0.01}, {0.5, 0.0, 0.0}, {1, 1, 1},
                        {0, 0, 0}, {0, 0, 0});
  MuHat mu{{0.0, 0.0, 0.0}};
  AssumptionSet a;
  a.lipschitz = LipschitzAssumption{1.0, Metric::euclidean()};
  a.monotone = PartialOrder::explicit_pairs({{0, 1}});
  auto r = evaluate(d, mu, a);
  CHECK(r.method_used == "propagation");
  // Third point is bracketed through the second, strictly tighter than any
  // single hop from the overlap region.
  CHECK(r.psi2.per_point_lower[1] == doctest::Approx(-1.02956).epsilon(1e-4));

  AssumptionSet lip_only;
  lip_only.lipschitz = a.lipschitz;
  CHECK(evaluate(d, mu, lip_only).method_used == "lipschitz");
  AssumptionSet mono_only;
  mono_only.bounds = OutcomeBounds{-2.0, 2.0};
  mono_only.monotone = PartialOrder::explicit_pairs({{0, 1}});
  CHECK(evaluate(d, mu, mono_only).method_used == "monotone-bounded");
}

TEST_CASE("no no-overlap rows collapses the interval to psi_id") {
  auto d = make_dataset(1, {0.0, 1.0}, {0.5, 0.5}, {0.5, 0.5}, {1, 0}, {1.0, 0});
  MuHat mu{{0.5, 0.5}};
  auto r = evaluate(d, mu, lipschitz_box(1.0));
  CHECK(r.lower == r.psi_id.value);
  CHECK(r.upper == r.psi_id.value);
  CHECK(r.fraction_no_overlap == 0.0);
}

TEST_CASE("sentinel L dispatches to manski with zero-ulp agreement") {
  Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    auto inst = opeid::testing::random_instance(rng, 40);
    OutcomeBounds box = opeid::testing::box_for(inst);
    AssumptionSet a;
    a.bounds = box;
    a.lipschitz = LipschitzAssumption{kLipschitzInfinity, Metric::euclidean()};
    auto r = evaluate(inst.data, inst.mu, a);
    auto manski = manski_bounds(inst.data, box.lower, box.upper);
    CHECK(r.psi2.lower == manski.lower);
    CHECK(r.psi2.upper == manski.upper);
    CHECK(r.method_used == "manski");
  }
}

TEST_CASE("mu outside the box: hard error by default, clamping on request") {
  auto d = make_dataset(1, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  MuHat mu{{1.4, 0.9, 0.0}};
  auto a = lipschitz_box(1.0);
  CHECK_THROWS_AS(evaluate(d, mu, a), InvariantError);
  EvaluateOptions opt;
  opt.clamp_mu = true;
  auto r = evaluate(d, mu, a, opt);
  // Clamped pin at x=0 is 1.0; per-point lower at x=2 is max(1-2, 0.9-1, 0)=0.
  CHECK(r.psi2.per_point_lower[0] == doctest::Approx(0.0));
  CHECK(r.psi2.per_point_upper[0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible assumptions raise with the data-driven L hint") {
  auto d = make_dataset(1, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  MuHat mu{{0.9, 0.1, 0.0}};
  try {
    evaluate(d, mu, lipschitz_box(0.3));
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.l_lower_bound == doctest::Approx(0.8));
  }
}

TEST_CASE("multi-action additivity and interval sums") {
  Rng rng(52);
  std::vector<LoggedDataset> datasets;
  std::vector<MuHat> mus;
  std::vector<AssumptionSet> assumptions;
  for (int a = 0; a < 3; ++a) {
    auto inst = opeid::testing::random_instance(rng, 20);
    while (inst.data.n() != 12) inst = opeid::testing::random_instance(rng, 20);
    datasets.push_back(inst.data);
    mus.push_back(inst.mu);
    AssumptionSet s;
    s.bounds = opeid::testing::box_for(inst);
    s.lipschitz = LipschitzAssumption{inst.L, Metric::euclidean()};
    assumptions.push_back(s);
  }
  auto combined = evaluate_multi_action(datasets, mus, assumptions);
  double lo = 0.0, hi = 0.0;
  for (std::size_t a = 0; a < datasets.size(); ++a) {
    auto r = evaluate(datasets[a], mus[a], assumptions[a]);
    lo += r.lower;
    hi += r.upper;
  }
  CHECK(std::abs(combined.lower - lo) <= 1e-12);
  CHECK(std::abs(combined.upper - hi) <= 1e-12);

  // Single action: identical to evaluate.
  auto single = evaluate_multi_action({datasets[0]}, {mus[0]}, {assumptions[0]});
  auto direct = evaluate(datasets[0], mus[0], assumptions[0]);
  CHECK(single.lower == direct.lower);
  CHECK(single.upper == direct.upper);
}

TEST_CASE("sweep: nesting, sentinel tail equals manski, infeasible cells flagged") {
  Rng rng(53);
  auto inst = opeid::testing::random_instance(rng, 40);
  OutcomeBounds box = opeid::testing::box_for(inst);
  AssumptionSet base;
  base.bounds = box;
  base.lipschitz = LipschitzAssumption{1.0, Metric::euclidean()};

  std::vector<double> grid{0.0, inst.L, inst.L * 2, inst.L * 4, kLipschitzInfinity};
  auto sweep = sweep_L(inst.data, inst.mu, base, grid);
  REQUIRE(sweep.cells.size() == grid.size());

  const SweepCell* prev = nullptr;
  for (const auto& cell : sweep.cells) {
    if (!cell.feasible) {
      CHECK_FALSE(cell.infeasible_reason.empty());
      continue;
    }
    if (prev && prev->result) {
      CHECK(prev->result->lower >= cell.result->lower - 1e-12);
      CHECK(prev->result->upper <= cell.result->upper + 1e-12);
    }
    prev = &cell;
  }
  const auto& last = sweep.cells.back();
  REQUIRE(last.feasible);
  auto manski = manski_bounds(inst.data, box.lower, box.upper);
  CHECK(last.result->psi2.lower == manski.lower);
  CHECK(last.result->psi2.upper == manski.upper);

  // Conservative sweep: every cell's interval contains the exact cell.
  EvaluateOptions cons;
  cons.conservative = true;
  auto cons_sweep = sweep_L(inst.data, inst.mu, base, grid, cons);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!sweep.cells[k].feasible || !cons_sweep.cells[k].feasible) continue;
    CHECK(cons_sweep.cells[k].result->lower <= sweep.cells[k].result->lower + 1e-12);
    CHECK(cons_sweep.cells[k].result->upper >= sweep.cells[k].result->upper - 1e-12);
  }
}

TEST_CASE("sweep matches evaluate cell-by-cell") {
  Rng rng(54);
  for (int t = 0; t < 20; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    AssumptionSet base;
    base.bounds = inst.bounds;
    base.lipschitz = LipschitzAssumption{1.0, Metric::euclidean()};
    std::vector<double> grid{inst.L, inst.L * 3};
    auto sweep = sweep_L(inst.data, inst.mu, base, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      AssumptionSet cell = base;
      cell.lipschitz->L = grid[k];
      auto direct = evaluate(inst.data, inst.mu, cell);
      REQUIRE(sweep.cells[k].feasible);
      CHECK(sweep.cells[k].result->lower == direct.lower);
      CHECK(sweep.cells[k].result->upper == direct.upper);
    }
  }
}

TEST_CASE("one-hot eval probabilities with full overlap sum to the pooled ipw") {
  Rng rng(55);
  const int n = 40, K = 3;
  CovariateMatrix X{n, 1, {}};
  X.values.resize(n);
  for (auto& v : X.values) v = rng.uniform();
  std::vector<int> chosen(n), preferred(n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    chosen[i] = static_cast<int>(rng.index(K));
    preferred[i] = static_cast<int>(rng.index(K));
    y[i] = rng.uniform();
  }
  std::vector<LoggedDataset> datasets(K);
  std::vector<MuHat> mus(K);
  std::vector<AssumptionSet> assumptions(K);
  for (int a = 0; a < K; ++a) {
    datasets[a].covariates = X;
    datasets[a].behavior_prob.assign(n, 1.0 / K);
    datasets[a].eval_prob.resize(n);
    datasets[a].action_taken.resize(n);
    datasets[a].outcome.assign(n, 0.0);
    mus[a].fitted.assign(n, 0.5);
    assumptions[a].bounds = OutcomeBounds{0.0, 1.0};
    for (int i = 0; i < n; ++i) {
      datasets[a].eval_prob[i] = preferred[i] == a ? 1.0 : 0.0;
      datasets[a].action_taken[i] = chosen[i] == a ? 1 : 0;
      if (chosen[i] == a) datasets[a].outcome[i] = y[i];
    }
  }
  EvaluateOptions opt;
  opt.estimator = EstimatorKind::Ipw;
  auto combined = evaluate_multi_action(datasets, mus, assumptions, opt);
  // Full overlap: the interval is a point equal to the pooled ipw value.
  double pooled = 0.0;
  for (int i = 0; i < n; ++i)
    if (chosen[i] == preferred[i]) pooled += y[i] * K;
  pooled /= n;
  CHECK(combined.lower == doctest::Approx(pooled).epsilon(1e-12));
  CHECK(combined.upper == doctest::Approx(combined.lower).epsilon(1e-12));
}
