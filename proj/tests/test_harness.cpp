#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "harness/convert.hpp"
#include "harness/coverage.hpp"
#include "harness/fitters.hpp"
#include "harness/policy_study.hpp"
#include "harness/rate_study.hpp"
#include "harness/synthetic.hpp"
#include "rng.hpp"

using namespace opeid;

TEST_CASE("synthetic spec validation catches an understated Lipschitz constant") {
  SyntheticSpec spec;
  spec.validate();  // defaults are consistent
  SyntheticSpec lying = spec;
  lying.true_L = 0.1;  // the linear family has slope 0.6
  CHECK_THROWS_AS(lying.validate(), InvariantError);
  SyntheticSpec bad_range = spec;
  bad_range.a0 = 0.9;  // mu(1) = 1.5 > 1 with Bernoulli outcomes
  CHECK_THROWS_AS(bad_range.validate(), InvariantError);
}

TEST_CASE("population targets for the linear family match hand integration") {
  SyntheticSpec spec;  // mu(x) = 0.2 + 0.6x, eval_p = 0.5, carve at 0.8
  CHECK(population_psi(spec) == doctest::Approx(0.5 * (0.2 + 0.3)).epsilon(1e-3));
  // With L = true_L the envelope over the carve-out is mu(0.8) - L(x - 0.8):
  // integral 0.124, times eval_p.
  CHECK(population_psi2_lower(spec, spec.true_L, 0.0, 1.0) ==
        doctest::Approx(0.5 * 0.124).epsilon(1e-3));
}

TEST_CASE("generated draws respect the carve-out and are seed-deterministic") {
  SyntheticSpec spec;
  Rng a(7), b(7);
  auto d1 = generate(spec, 500, a);
  auto d2 = generate(spec, 500, b);
  CHECK(d1.data.covariates.values == d2.data.covariates.values);
  CHECK(d1.data.outcome == d2.data.outcome);
  for (int i = 0; i < d1.data.n(); ++i) {
    double x = d1.data.covariates.values[i];
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    if (x > spec.carve_threshold) {
      CHECK(d1.data.behavior_prob[i] == 0.0);
      CHECK(d1.data.action_taken[i] == 0);
    } else {
      CHECK(d1.data.behavior_prob[i] == doctest::Approx(spec.behavior_p));
    }
    CHECK(d1.data.eval_prob[i] == doctest::Approx(spec.eval_p));
    CHECK(d1.true_mu.fitted[i] == doctest::Approx(spec.mu(x)));
    if (d1.data.action_taken[i])
      CHECK((d1.data.outcome[i] == 0.0 || d1.data.outcome[i] == 1.0));
  }
}

TEST_CASE("ridge fit recovers a noiseless linear signal") {
  SyntheticSpec spec;
  spec.bernoulli = false;
  spec.noise_sd = 0.0;  // y = mu(x) exactly on observed rows
  Rng rng(8);
  auto draw = generate(spec, 400, rng);
  std::vector<int> train;
  for (int i = 0; i < draw.data.n(); ++i)
    if (draw.data.action_taken[i]) train.push_back(i);
  REQUIRE(train.size() > 10);
  auto fit = ridge_fit(draw.data.covariates, draw.data.outcome, train, 1e-8);
  for (int i = 0; i < draw.data.n(); ++i)
    CHECK(fit.fitted[i] == doctest::Approx(draw.true_mu.fitted[i]).epsilon(1e-4));
  CHECK_THROWS_AS(ridge_fit(draw.data.covariates, draw.data.outcome, {}, 1.0), InvariantError);
}

TEST_CASE("knn fit worked example") {
  CovariateMatrix X{4, 1, {0.0, 1.0, 2.0, 1.4}};
  std::vector<double> y{0.0, 10.0, 20.0, 0.0};
  auto k1 = knn_fit(X, y, {0, 1, 2}, 1);
  CHECK(k1.fitted[3] == doctest::Approx(10.0));  // nearest train row is x=1
  auto k2 = knn_fit(X, y, {0, 1, 2}, 2);
  CHECK(k2.fitted[3] == doctest::Approx(15.0));  // x=1 and x=2
  CHECK_THROWS_AS(knn_fit(X, y, {0, 1, 2}, 0), InvariantError);
}

TEST_CASE("multiclass conversion thresholds and flags unsupported classes") {
  CovariateMatrix X{3, 1, {0.0, 0.5, 1.0}};
  std::vector<int> labels{0, 1, 0};
  Rng rng(9);

  MulticlassPolicy mild{{0.9, 0.1}, {0.5, 0.5}, 0.05};
  auto keep = convert_multiclass(X, labels, mild, rng);
  CHECK(keep.behavior_used[0] == doctest::Approx(0.9));
  CHECK(keep.behavior_used[1] == doctest::Approx(0.1));
  CHECK_FALSE(keep.unsupported[0]);
  CHECK_FALSE(keep.unsupported[1]);

  MulticlassPolicy harsh{{0.97, 0.03}, {0.5, 0.5}, 0.05};
  auto cut = convert_multiclass(X, labels, harsh, rng);
  CHECK(cut.behavior_used[0] == doctest::Approx(1.0));
  CHECK(cut.behavior_used[1] == 0.0);
  CHECK(cut.unsupported[1]);
  // Rows of class-1 datasets now have pb = 0 everywhere: pure no-overlap.
  for (int i = 0; i < 3; ++i) {
    CHECK(cut.per_action[1].behavior_prob[i] == 0.0);
    CHECK(cut.per_action[1].action_taken[i] == 0);
  }
  // Outcome definition: 1{action == label} on the chosen action.
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 2; ++a)
      if (cut.per_action[a].action_taken[i])
        CHECK(cut.per_action[a].outcome[i] == (labels[i] == a ? 1.0 : 0.0));

  MulticlassPolicy empty{{0.03, 0.03}, {0.5, 0.5}, 0.05};
  CHECK_THROWS_AS(convert_multiclass(X, labels, empty, rng), InvariantError);

  CHECK(empirical_policy_value({0, 1, 1}, {0.2, 0.8}) == doctest::Approx(1.8 / 3));
}

TEST_CASE("multiclass conversion is seed-deterministic") {
  Rng seed_rng(10);
  CovariateMatrix X{50, 2, {}};
  X.values.resize(100);
  for (auto& v : X.values) v = seed_rng.uniform();
  std::vector<int> labels(50);
  for (auto& l : labels) l = static_cast<int>(seed_rng.index(3));
  MulticlassPolicy policy{{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}, 0.05};
  Rng r1(11), r2(11);
  auto a = convert_multiclass(X, labels, policy, r1);
  auto b = convert_multiclass(X, labels, policy, r2);
  for (int k = 0; k < 3; ++k) {
    CHECK(a.per_action[k].action_taken == b.per_action[k].action_taken);
    CHECK(a.per_action[k].outcome == b.per_action[k].outcome);
  }
}

TEST_CASE("coverage: wider tolerance never lowers coverage; negative L is infeasible") {
  SyntheticSpec spec;
  auto tight = simulate_coverage(spec, {400}, {2.0}, 40, 0.02, OutcomeBounds{0.0, 1.0}, 123);
  auto loose = simulate_coverage(spec, {400}, {2.0}, 40, 0.04, OutcomeBounds{0.0, 1.0}, 123);
  REQUIRE(tight.cells.size() == 1);
  CHECK(loose.cells[0].coverage >= tight.cells[0].coverage);
  CHECK(tight.cells[0].coverage >= 0.7);
  CHECK(tight.cells[0].feasibility == doctest::Approx(1.0));
  CHECK(tight.psi_true == doctest::Approx(population_psi(spec)).epsilon(1e-6));

  auto infeasible =
      simulate_coverage(spec, {400}, {-0.2}, 40, 0.02, OutcomeBounds{0.0, 1.0}, 123);
  CHECK(infeasible.cells[0].feasibility == doctest::Approx(0.0));
  CHECK(infeasible.cells[0].coverage == doctest::Approx(0.0));
}

TEST_CASE("resampling coverage runs against the empirical truth") {
  SyntheticSpec spec;
  spec.bernoulli = false;
  Rng rng(14);
  auto draw = generate(spec, 600, rng);
  // Counterfactual outcome under the evaluation policy is mu itself here.
  auto report = simulate_coverage_resample(draw.data, draw.true_mu.fitted, {300}, {2.0}, 30,
                                           0.05, OutcomeBounds{0.0, 1.0}, 77);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].replications == 30);
  CHECK(report.cells[0].coverage >= 0.0);
  CHECK(report.cells[0].coverage <= 1.0);
}

TEST_CASE("rate study: mse falls with n and the slope is negative") {
  SyntheticSpec spec;
  auto report = rate_study(spec, {200, 1600}, 60, 2.0, OutcomeBounds{0.0, 1.0}, false, 2024);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].mse > report.rows[1].mse);
  CHECK(report.slope < 0.0);
  CHECK(report.population_psi2_lower ==
        doctest::Approx(population_psi2_lower(spec, 2.0, 0.0, 1.0)).epsilon(1e-9));

  auto oracle = rate_study(spec, {200, 1600}, 60, 2.0, OutcomeBounds{0.0, 1.0}, true, 2024);
  CHECK(oracle.rows[1].mse < report.rows[0].mse);
}

TEST_CASE("policy study: zero width at the behavior threshold, informative away from it") {
  ThresholdPolicySpec spec;
  auto report = threshold_policy_study(spec, 800, {0.5, 0.3}, {1.0}, 99);
  REQUIRE(report.rows.size() == 2);
  const auto& at_behavior = report.rows[0];
  const auto& shifted = report.rows[1];
  CHECK(at_behavior.T == 0.5);
  CHECK(at_behavior.width == doctest::Approx(0.0));
  CHECK(shifted.width > 0.0);
  CHECK(shifted.manski_width >= shifted.width - 1e-12);
  if (shifted.feasible) {
    CHECK(shifted.narrowing >= 0.0);
    CHECK(shifted.narrowing <= 1.0);
    if (shifted.imputation_feasible) {
      CHECK(shifted.imputation >= shifted.lower - 1e-9);
      CHECK(shifted.imputation <= shifted.upper + 1e-9);
    }
  }
  CHECK(std::isfinite(shifted.oracle));
}

TEST_CASE("threshold-policy oracle is stable and monotone-friendly") {
  ThresholdPolicySpec spec;
  Rng rng(15);
  auto draw = generate_threshold_policy(spec, 200, rng);
  double at_05 = population_psi_threshold(spec, 0.5, draw.v0, draw.in_target);
  double at_03 = population_psi_threshold(spec, 0.3, draw.v0, draw.in_target);
  CHECK(std::isfinite(at_05));
  CHECK(std::isfinite(at_03));
  // Lowering T routes more mass to the targeted (high-V0) actions.
  CHECK(at_03 != doctest::Approx(at_05).epsilon(1e-12));
}
