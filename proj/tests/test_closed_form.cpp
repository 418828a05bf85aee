#include <doctest.h>

#include <cmath>

#include "closed_form.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "test_util.hpp"

using namespace opeid;
using opeid::testing::make_dataset;

TEST_CASE("manski bounds worked example: [0, 0.375]") {
  auto d = make_dataset(1, {0, 1, 2, 3}, {0.5, 0.5, 0.0, 0.0}, {1.0, 1.0, 0.5, 1.0},
                        {0, 0, 0, 0}, {0, 0, 0, 0});
  auto b = manski_bounds(d, 0.0, 1.0);
  CHECK(b.lower == doctest::Approx(0.0));
  CHECK(b.upper == doctest::Approx(0.375));
  CHECK(b.rows == std::vector<int>{2, 3});
}

TEST_CASE("manski with no no-overlap rows is [0,0]") {
  auto d = make_dataset(1, {0, 1}, {0.5, 0.5}, {1, 1}, {0, 0}, {0, 0});
  auto b = manski_bounds(d, 0.0, 1.0);
  CHECK(b.lower == 0.0);
  CHECK(b.upper == 0.0);
}

TEST_CASE("lipschitz 1-D worked example") {
  // overlap {x=0: mu=0.2, x=1: mu=0.5}, no-overlap {x=2: pe=1}, L=0.4, n=3,
  // bounds [0,1]. Lower: max(0.2-0.8, 0.5-0.4, 0) = 0.1 from the near point;
  // upper: min(0.2+0.8, 0.5+0.4, 1) = 0.9, also from the near point.
  auto d = make_dataset(1, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.0}, {1.0, 1.0, 1.0}, {0, 0, 0},
                        {0, 0, 0});
  MuHat mu{{0.2, 0.5, 0.0}};
  auto b = lipschitz_bounds(d, mu, 0.4, Metric::euclidean(), OutcomeBounds{0.0, 1.0});
  REQUIRE(b.per_point_lower.size() == 1);
  CHECK(b.per_point_lower[0] == doctest::Approx(0.1));
  CHECK(b.per_point_upper[0] == doctest::Approx(0.9));
  CHECK(b.arg_lower[0] == 1);
  CHECK(b.arg_upper[0] == 1);
  CHECK(b.lower == doctest::Approx(0.1 / 3));
  CHECK(b.upper == doctest::Approx(0.9 / 3));
}

TEST_CASE("L=0 requires mu constant on the overlap region") {
  auto d = make_dataset(1, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  MuHat varying{{1.0, 0.5, 0.0}};
  CHECK_THROWS_AS(lipschitz_bounds(d, varying, 0.0, Metric::euclidean(), std::nullopt),
                  InfeasibleError);
  MuHat constant{{0.7, 0.7, 0.0}};
  auto b = lipschitz_bounds(d, constant, 0.0, Metric::euclidean(), std::nullopt);
  CHECK(b.per_point_lower[0] == doctest::Approx(0.7));
  CHECK(b.per_point_upper[0] == doctest::Approx(0.7));
}

TEST_CASE("sentinel L reproduces manski exactly") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    auto inst = opeid::testing::random_instance(rng);
    OutcomeBounds box = inst.bounds.value_or(OutcomeBounds{-2.0, 2.0});
    auto viaL = lipschitz_bounds(inst.data, inst.mu, kLipschitzInfinity, Metric::euclidean(),
                                 box);
    auto manski = manski_bounds(inst.data, box.lower, box.upper);
    CHECK(viaL.lower == manski.lower);
    CHECK(viaL.upper == manski.upper);
    CHECK(viaL.method == BoundMethod::Manski);
  }
}

TEST_CASE("empty overlap falls back to manski with bounds, errors without") {
  auto d = make_dataset(1, {0.0, 1.0}, {0.0, 0.0}, {1, 1}, {0, 0}, {0, 0});
  MuHat mu{{0.0, 0.0}};
  auto b = lipschitz_bounds(d, mu, 1.0, Metric::euclidean(), OutcomeBounds{0.0, 1.0});
  CHECK(b.manski_fallback);
  CHECK(b.lower == doctest::Approx(0.0));
  CHECK(b.upper == doctest::Approx(1.0));  // (1/2) * (1.0 + 1.0) * u
  CHECK_THROWS_AS(lipschitz_bounds(d, mu, 1.0, Metric::euclidean(), std::nullopt),
                  InvariantError);
}

TEST_CASE("monotone bounds worked examples") {
  // overlap {x=0: mu=0.3}; no-overlap at x=1 (above) and x=-1 (below).
  auto above = make_dataset(1, {0.0, 1.0}, {0.5, 0.0}, {1, 1}, {0, 0}, {0, 0});
  MuHat mu{{0.3, 0.0}};
  auto b1 = monotone_bounds(above, mu, PartialOrder::coordinatewise(), 0.0, 1.0);
  CHECK(b1.per_point_lower[0] == doctest::Approx(0.3));
  CHECK(b1.per_point_upper[0] == doctest::Approx(1.0));

  auto below = make_dataset(1, {0.0, -1.0}, {0.5, 0.0}, {1, 1}, {0, 0}, {0, 0});
  auto b2 = monotone_bounds(below, mu, PartialOrder::coordinatewise(), 0.0, 1.0);
  CHECK(b2.per_point_lower[0] == doctest::Approx(0.0));
  CHECK(b2.per_point_upper[0] == doctest::Approx(0.3));
}

TEST_CASE("incomparable no-overlap point falls back to the box") {
  auto d = make_dataset(2, {0, 0, 1, -1}, {0.5, 0.0}, {1, 1}, {0, 0}, {0, 0});
  MuHat mu{{0.4, 0.0}};
  auto b = monotone_bounds(d, mu, PartialOrder::coordinatewise(), 0.1, 0.9);
  CHECK(b.per_point_lower[0] == doctest::Approx(0.1));
  CHECK(b.per_point_upper[0] == doctest::Approx(0.9));
}

TEST_CASE("nesting: lipschitz-bounded interval inside manski, monotone in L") {
  Rng rng(22);
  for (int t = 0; t < 200; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    OutcomeBounds box = opeid::testing::box_for(inst);
    auto manski = manski_bounds(inst.data, box.lower, box.upper);
    auto tight = lipschitz_bounds(inst.data, inst.mu, inst.L, Metric::euclidean(), box);
    auto wide = lipschitz_bounds(inst.data, inst.mu, inst.L * 2, Metric::euclidean(), box);
    CHECK(tight.lower >= manski.lower - 1e-12);
    CHECK(tight.upper <= manski.upper + 1e-12);
    CHECK(tight.lower >= wide.lower - 1e-12);
    CHECK(tight.upper <= wide.upper + 1e-12);
    CHECK(wide.lower >= manski.lower - 1e-12);
    CHECK(wide.upper <= manski.upper + 1e-12);
    for (std::size_t k = 0; k < tight.per_point_lower.size(); ++k) {
      CHECK(tight.per_point_lower[k] >= box.lower - 1e-12);
      CHECK(tight.per_point_upper[k] <= box.upper + 1e-12);
      CHECK(tight.per_point_lower[k] <= tight.per_point_upper[k] + 1e-12);
    }
  }
}

TEST_CASE("exchange symmetry: negating mu and swapping bounds maps lower to -upper") {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    OutcomeBounds box = opeid::testing::box_for(inst);
    auto base = lipschitz_bounds(inst.data, inst.mu, inst.L, Metric::euclidean(), box);
    MuHat neg = inst.mu;
    for (auto& v : neg.fitted) v = -v;
    auto mirrored = lipschitz_bounds(inst.data, neg, inst.L, Metric::euclidean(),
                                     OutcomeBounds{-box.upper, -box.lower});
    CHECK(mirrored.upper == doctest::Approx(-base.lower).epsilon(1e-12));
    CHECK(mirrored.lower == doctest::Approx(-base.upper).epsilon(1e-12));
  }
}

TEST_CASE("per-point lower bound is itself L-Lipschitz across no-overlap rows") {
  Rng rng(24);
  for (int t = 0; t < 100; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    OutcomeBounds box = opeid::testing::box_for(inst);
    auto b = lipschitz_bounds(inst.data, inst.mu, inst.L, Metric::euclidean(), box);
    Metric m = Metric::euclidean();
    for (std::size_t a = 0; a < b.rows.size(); ++a)
      for (std::size_t c = a + 1; c < b.rows.size(); ++c) {
        double d = m.distance(inst.data.covariates, b.rows[a], b.rows[c]);
        CHECK(std::abs(b.per_point_lower[a] - b.per_point_lower[c]) <= inst.L * d + 1e-9);
        CHECK(std::abs(b.per_point_upper[a] - b.per_point_upper[c]) <= inst.L * d + 1e-9);
      }
  }
}

TEST_CASE("oracle equivalence: closed form equals propagation optimum") {
  Rng rng(25);
  for (int t = 0; t < 200; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    auto closed =
        lipschitz_bounds(inst.data, inst.mu, inst.L, Metric::euclidean(), inst.bounds);
    AssumptionSet a;
    a.bounds = inst.bounds;
    a.lipschitz = LipschitzAssumption{inst.L, Metric::euclidean()};
    auto sys = ConstraintSystem::from_assumptions(inst.data, inst.mu, a);
    auto lo = solve_min(sys);
    auto hi = solve_max(sys);
    REQUIRE(lo.status == LpStatus::Optimal);
    REQUIRE(hi.status == LpStatus::Optimal);
    CHECK(closed.lower == doctest::Approx(lo.objective).epsilon(1e-9));
    CHECK(closed.upper == doctest::Approx(hi.objective).epsilon(1e-9));
  }
}
