#include "harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace opeid {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Composite midpoint rule, refined until two successive grids agree to 1e-3
// relative (or 1e-12 absolute near zero).
template <typename F>
double integrate(F f, double a, double b) {
  if (b <= a) return 0.0;
  auto pass = [&](int m) {
    double h = (b - a) / m;
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += f(a + (k + 0.5) * h);
    return s * h;
  };
  double prev = pass(64);
  for (int m = 128; m <= (1 << 20); m *= 2) {
    double cur = pass(m);
    if (std::abs(cur - prev) <= 1e-3 * std::max(std::abs(cur), 1e-12) &&
        std::abs(cur - prev) <= 1e-4 * std::max(std::abs(cur), 1.0) + 1e-9)
      return cur;
    prev = cur;
  }
  throw InvariantError("quadrature did not stabilize to the required tolerance");
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double SyntheticSpec::mu(double x) const {
  switch (family) {
    case MuFamily::Linear:
      return a0 + a1 * x;
    case MuFamily::Sinusoid:
      return 0.5 + amp * std::sin(kTwoPi * freq * x);
    case MuFamily::Piecewise:
      return x < 0.5 ? a0 + a1 * x : a0 + a1 * 0.5;
  }
  return 0.0;
}

void SyntheticSpec::validate() const {
  if (!(eval_p >= 0.0 && eval_p <= 1.0)) throw InvariantError("eval_p must be in [0,1]");
  if (!(behavior_p > 0.0 && behavior_p <= 1.0))
    throw InvariantError("behavior_p must be in (0,1]");
  if (!(carve_threshold > 0.0 && carve_threshold <= 1.0))
    throw InvariantError("carve_threshold must be in (0,1]");
  if (!(true_L >= 0.0)) throw InvariantError("true_L must be nonnegative");
  const int grid = 20000;
  for (int k = 0; k < grid; ++k) {
    double x0 = static_cast<double>(k) / grid;
    double x1 = static_cast<double>(k + 1) / grid;
    double slope = std::abs(mu(x1) - mu(x0)) * grid;
    if (slope > true_L + 1e-6)
      throw InvariantError("declared Lipschitz constant is violated by mu on the grid");
  }
  if (bernoulli) {
    for (int k = 0; k <= grid; ++k) {
      double v = mu(static_cast<double>(k) / grid);
      if (v < 0.0 || v > 1.0)
        throw InvariantError("Bernoulli outcomes need mu in [0,1] on the domain");
    }
  }
}

SyntheticDraw generate(const SyntheticSpec& spec, int n, Rng& rng) {
  SyntheticDraw draw;
  auto& d = draw.data;
  d.covariates.n = n;
  d.covariates.p = 1;
  d.covariates.values.resize(n);
  d.behavior_prob.resize(n);
  d.eval_prob.resize(n);
  d.action_taken.resize(n);
  d.outcome.assign(n, 0.0);
  draw.true_mu.fitted.resize(n);

  for (int i = 0; i < n; ++i) {
    double x = rng.uniform();
    d.covariates.values[i] = x;
    double m = spec.mu(x);
    draw.true_mu.fitted[i] = m;
    d.eval_prob[i] = spec.eval_p;
    d.behavior_prob[i] = x <= spec.carve_threshold ? spec.behavior_p : 0.0;
    bool taken = d.behavior_prob[i] > 0.0 && rng.bernoulli(d.behavior_prob[i]);
    d.action_taken[i] = taken ? 1 : 0;
    if (taken)
      d.outcome[i] = spec.bernoulli ? (rng.bernoulli(m) ? 1.0 : 0.0)
                                    : m + rng.normal(0.0, spec.noise_sd);
  }
  return draw;
}

double population_psi(const SyntheticSpec& spec) {
  return spec.eval_p * integrate([&](double x) { return spec.mu(x); }, 0.0, 1.0);
}

double population_psi2_lower(const SyntheticSpec& spec, double L, double lower, double upper) {
  if (lower > upper) throw InvariantError("bounds out of order");
  // For x beyond the carve-out, sup over overlap x' of mu(x') - L(x - x')
  // equals C - L x with C = sup (mu(x') + L x'); the sup is grid-stable
  // because the integrand is (true_L + L)-Lipschitz.
  auto sup_pass = [&](int m) {
    double best = -1e300;
    for (int k = 0; k <= m; ++k) {
      double xp = spec.carve_threshold * k / m;
      best = std::max(best, spec.mu(xp) + L * xp);
    }
    return best;
  };
  double c1 = sup_pass(1 << 16), c2 = sup_pass(1 << 17);
  if (std::abs(c2 - c1) > 1e-3 * std::max(std::abs(c2), 1e-12))
    throw InvariantError("quadrature did not stabilize to the required tolerance");
  const double C = c2;
  return spec.eval_p * integrate([&](double x) { return std::max(lower, C - L * x); },
                                 spec.carve_threshold, 1.0);
}

double ThresholdPolicySpec::mu(double x2, double v0) const {
  return sigmoid(b0 + b1 * x2 + b2 * v0);
}

double ThresholdPolicySpec::true_L() const {
  // sup |d mu / d x2| = b1/4 at the sigmoid's inflection; the metric puts
  // weight 1 on coordinate 2, so this is also the metric Lipschitz constant.
  return std::abs(b1) / 4.0;
}

Metric ThresholdPolicySpec::metric(int p) const {
  std::vector<double> w(p, 0.1);
  if (p > 2) w[2] = 1.0;
  return Metric::weighted_euclidean(std::move(w));
}

ThresholdPolicyDraw generate_threshold_policy(const ThresholdPolicySpec& spec, int n, Rng& rng) {
  const double eval_T = spec.behavior_T;
  const int K = spec.n_actions;
  if (K < 2) throw InvariantError("threshold-policy study needs at least two actions");
  const int p = 5;

  ThresholdPolicyDraw draw;
  draw.v0.resize(K);
  std::vector<std::vector<double>> V(K, std::vector<double>(p));
  for (int a = 0; a < K; ++a) {
    for (int j = 0; j < p; ++j) V[a][j] = rng.uniform();
    draw.v0[a] = V[a][0];
  }
  // Target set: top half by V_{a,0}, ties to the lower index.
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return draw.v0[a] > draw.v0[b] || (draw.v0[a] == draw.v0[b] && a < b);
  });
  draw.in_target.assign(K, false);
  for (int r = 0; r < K / 2; ++r) draw.in_target[order[r]] = true;
  const int target_size = K / 2;

  auto policy = [&](double T, double x2, int a) {
    if (x2 > T) return 1.0 / K;
    return draw.in_target[a] ? 1.0 / target_size : 0.0;
  };

  CovariateMatrix X;
  X.n = n;
  X.p = p;
  X.values.resize(static_cast<std::size_t>(n) * p);
  std::vector<int> chosen(n);
  std::vector<double> clicked(n);
  std::vector<double> probs(K);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X.values[static_cast<std::size_t>(i) * p + j] = rng.uniform();
    double x2 = X.at(i, 2);
    for (int a = 0; a < K; ++a) probs[a] = policy(spec.behavior_T, x2, a);
    chosen[i] = rng.categorical(probs.data(), K);
    clicked[i] = rng.bernoulli(spec.mu(x2, draw.v0[chosen[i]])) ? 1.0 : 0.0;
  }

  draw.per_action.resize(K);
  draw.true_mu.resize(K);
  for (int a = 0; a < K; ++a) {
    auto& d = draw.per_action[a];
    d.covariates = X;
    d.behavior_prob.resize(n);
    d.eval_prob.resize(n);
    d.action_taken.resize(n);
    d.outcome.assign(n, 0.0);
    draw.true_mu[a].fitted.resize(n);
    for (int i = 0; i < n; ++i) {
      double x2 = X.at(i, 2);
      d.behavior_prob[i] = policy(spec.behavior_T, x2, a);
      d.eval_prob[i] = policy(eval_T, x2, a);
      d.action_taken[i] = chosen[i] == a ? 1 : 0;
      if (chosen[i] == a) d.outcome[i] = clicked[i];
      draw.true_mu[a].fitted[i] = spec.mu(x2, draw.v0[a]);
    }
  }
  return draw;
}

void set_eval_threshold(const ThresholdPolicySpec&, ThresholdPolicyDraw& draw, double T) {
  const int K = static_cast<int>(draw.per_action.size());
  int target_size = 0;
  for (bool b : draw.in_target) target_size += b ? 1 : 0;
  for (int a = 0; a < K; ++a) {
    auto& d = draw.per_action[a];
    for (int i = 0; i < d.n(); ++i) {
      double x2 = d.covariates.at(i, 2);
      d.eval_prob[i] = x2 > T ? 1.0 / K : (draw.in_target[a] ? 1.0 / target_size : 0.0);
    }
  }
}

double population_psi_threshold(const ThresholdPolicySpec& spec, double eval_T,
                                const std::vector<double>& v0,
                                const std::vector<bool>& in_target) {
  const int K = static_cast<int>(v0.size());
  int target_size = 0;
  for (bool b : in_target) target_size += b ? 1 : 0;
  double total = 0.0;
  for (int a = 0; a < K; ++a) {
    double above = integrate([&](double t) { return spec.mu(t, v0[a]); },
                             std::min(eval_T, 1.0), 1.0) /
                   K;
    double below = in_target[a]
                       ? integrate([&](double t) { return spec.mu(t, v0[a]); }, 0.0,
                                   std::min(eval_T, 1.0)) /
                             target_size
                       : 0.0;
    total += above + below;
  }
  return total;
}

}  // namespace opeid
