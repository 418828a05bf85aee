#include <doctest.h>

#include "identified.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace opeid;
using opeid::testing::make_dataset;

TEST_CASE("single-row ipw") {
  auto d = make_dataset(1, {0.0}, {0.5}, {0.25}, {1}, {2.0});
  CHECK(estimate_identified(d, EstimatorKind::Ipw).value == doctest::Approx(1.0));
}

TEST_CASE("no actions taken gives 0") {
  auto d = make_dataset(1, {0.0, 1.0}, {0.5, 0.5}, {0.5, 0.5}, {0, 0}, {0, 0});
  auto r = estimate_identified(d, EstimatorKind::Ipw);
  CHECK(r.value == 0.0);
  auto sn = estimate_identified(d, EstimatorKind::SelfNormalized);
  CHECK(sn.value == 0.0);
  CHECK(sn.degenerate);
}

TEST_CASE("two-row worked example: ipw 3.5, self-normalized 7/3") {
  auto d = make_dataset(1, {0.0, 1.0}, {0.5, 0.25}, {0.5, 0.5}, {1, 1}, {1.0, 3.0});
  CHECK(estimate_identified(d, EstimatorKind::Ipw).value == doctest::Approx(3.5));
  CHECK(estimate_identified(d, EstimatorKind::SelfNormalized).value ==
        doctest::Approx(7.0 / 3.0));
}

TEST_CASE("ipw is linear in the outcomes") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    double base = estimate_identified(inst.data, EstimatorKind::Ipw).value;
    double c = rng.uniform(-3.0, 3.0);
    auto scaled = inst.data;
    for (auto& y : scaled.outcome) y *= c;
    CHECK(estimate_identified(scaled, EstimatorKind::Ipw).value ==
          doctest::Approx(c * base).epsilon(1e-10));
  }
}

TEST_CASE("self-normalized estimate stays within the active outcome range") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    auto inst = opeid::testing::random_instance(rng, 30);
    double lo = 1e300, hi = -1e300;
    bool active = false;
    for (int i = 0; i < inst.data.n(); ++i)
      if (inst.data.action_taken[i] && inst.data.eval_prob[i] > 0.0) {
        active = true;
        lo = std::min(lo, inst.data.outcome[i]);
        hi = std::max(hi, inst.data.outcome[i]);
      }
    if (!active) continue;
    double v = estimate_identified(inst.data, EstimatorKind::SelfNormalized).value;
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("ipw converges on full-overlap synthetic data") {
  // pi_e = pi_b so psi(P0) = E[mu(X)] = 0.5 for Bernoulli(0.5) outcomes.
  Rng rng(13);
  double prev_err = 1e300;
  for (int n : {100, 1000, 10000}) {
    double err = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      Rng stream = rng.derive(n * 100 + r);
      std::vector<double> xs(n), pb(n, 0.5), pe(n, 0.5), y(n, 0.0);
      std::vector<std::uint8_t> a(n);
      for (int i = 0; i < n; ++i) {
        xs[i] = stream.uniform();
        a[i] = stream.bernoulli(0.5) ? 1 : 0;
        if (a[i]) y[i] = stream.bernoulli(0.5) ? 1.0 : 0.0;
      }
      auto d = opeid::testing::make_dataset(1, xs, pb, pe, a, y);
      err += std::abs(estimate_identified(d, EstimatorKind::Ipw).value - 0.25);
    }
    err /= reps;
    CHECK(err < prev_err);
    prev_err = err;
  }
}
