#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace opeid {

// One-dimensional data-generating process on [0, 1] with a declared Lipschitz
// constant, a constant evaluation policy, and a behavior policy that is zero
// on a right carve-out (the no-overlap region).
enum class MuFamily { Linear, Sinusoid, Piecewise };

struct SyntheticSpec {
  MuFamily family = MuFamily::Linear;
  double a0 = 0.2;   // linear/piecewise intercept
  double a1 = 0.6;   // linear/piecewise slope
  double freq = 1.0; // sinusoid: level 0.5 + amp*sin(2*pi*freq*x)
  double amp = 0.3;
  double true_L = 0.6;     // declared Lipschitz constant of mu on [0, 1]
  double noise_sd = 0.0;   // used when bernoulli=false
  bool bernoulli = true;   // Bernoulli(mu(x)) outcomes
  double eval_p = 0.5;     // constant pi_e
  double behavior_p = 0.7; // pi_b on the overlap region
  double carve_threshold = 0.8;  // pi_b = 0 for x > threshold

  double mu(double x) const;

  // Verifies the declared L against a fine finite-difference grid and basic
  // probability/range invariants.
  void validate() const;
};

struct SyntheticDraw {
  LoggedDataset data;
  MuHat true_mu;  // mu evaluated at the drawn covariates
};

SyntheticDraw generate(const SyntheticSpec& spec, int n, Rng& rng);

// Population target psi(P0) = eval_p * integral of mu, by adaptive midpoint
// quadrature (relative stability 1e-3 between refinements, else throws).
double population_psi(const SyntheticSpec& spec);

// Population lower bound on the unidentified part under Lipschitz-L plus the
// box [lower, upper]: integral over the carve-out of
// eval_p * max(lower, sup over overlap x' of mu(x') - L|x - x'|).
double population_psi2_lower(const SyntheticSpec& spec, double L, double lower, double upper);

// Multi-action generator with per-action covariates: users X in [0,1]^5,
// K actions with vectors V_a in [0,1]^5 drawn per seed, target set A* = the
// top half by V_{a,0}, policy pi_T(x, a) = 1/K when x_2 > T and uniform over
// A* otherwise, click model mu(x, a) = sigmoid(b0 + b1*x_2 + b2*V_{a,0}).
struct ThresholdPolicySpec {
  int n_actions = 6;
  double b0 = -1.0;
  double b1 = 2.0;
  double b2 = 0.5;
  double behavior_T = 0.5;

  double mu(double x2, double v0) const;
  // Lipschitz constant of mu in x for a fixed action, under the weighted
  // Euclidean metric returned by metric().
  double true_L() const;
  Metric metric(int p = 5) const;
};

struct ThresholdPolicyDraw {
  std::vector<LoggedDataset> per_action;  // binarized, one per action
  std::vector<MuHat> true_mu;             // mu(x_i, a) per action
  std::vector<double> v0;                 // V_{a,0} per action
  std::vector<bool> in_target;            // a in A*
};

// Draws action vectors, users, behavior actions and clicks. Evaluation
// probabilities are initialized at eval_T = behavior_T; use
// set_eval_threshold to retarget the same sample, which keeps interval
// widths comparable across a T grid.
ThresholdPolicyDraw generate_threshold_policy(const ThresholdPolicySpec& spec, int n, Rng& rng);

void set_eval_threshold(const ThresholdPolicySpec& spec, ThresholdPolicyDraw& draw, double T);

// Oracle psi(P0) for the threshold-policy process: mu and the policies depend
// on x only through x_2, so the value reduces to 1-D quadrature per action
// given the drawn action vectors.
double population_psi_threshold(const ThresholdPolicySpec& spec, double eval_T,
                                const std::vector<double>& v0,
                                const std::vector<bool>& in_target);

}  // namespace opeid
