#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "daimon/common/errors.hpp"
#include "daimon/common/rng.hpp"
#include "daimon/numerics/beta.hpp"

namespace daimon::attacks {

/// Probability that a uniform vector on the dot>=0 hemisphere of the unit
/// (n-1)-sphere lands within modified-cosine distance epsilon of a fixed
/// direction: I_{sin^2 beta}((n-1)/2, 1/2) with cos beta = 1 - epsilon,
/// i.e. sin^2 beta = 2 eps - eps^2.
inline double cap_probability(std::size_t n, double epsilon) {
  if (n < 2) throw ContractViolation("cap_probability: n must be at least 2");
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw ContractViolation("cap_probability: epsilon must lie in (0, 1]");
  double sin2 = epsilon * (2.0 - epsilon);
  return numerics::reg_inc_beta(sin2, (static_cast<double>(n) - 1.0) / 2.0, 0.5);
}

struct TrialEstimate {
  double linearized = 0.0;  // q = alpha / p
  double exact = 0.0;       // q = ln(1-alpha) / ln(1-p); alpha = 1 falls back
                            // to the linearized value
};

/// Trials needed for success probability alpha when each trial hits with
/// probability p. p = 0 yields infinity in both fields.
inline TrialEstimate required_trials(double p, double alpha) {
  if (p < 0.0 || p > 1.0) throw ContractViolation("required_trials: p must lie in [0, 1]");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ContractViolation("required_trials: alpha must lie in (0, 1]");
  if (p == 0.0) {
    double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  TrialEstimate t;
  t.linearized = alpha / p;
  if (alpha < 1.0 && p < 1.0) {
    t.exact = std::log1p(-alpha) / std::log1p(-p);
  } else if (p == 1.0) {
    t.exact = 1.0;
  } else {
    t.exact = t.linearized;  // certainty is only reached in the limit
  }
  return t;
}

struct CapAnalysis {
  std::size_t n = 0;
  double epsilon = 0.0;
  double p = 0.0;
  double q_for_alpha = 0.0;

  static CapAnalysis make(std::size_t n, double epsilon, double alpha) {
    CapAnalysis c;
    c.n = n;
    c.epsilon = epsilon;
    c.p = cap_probability(n, epsilon);
    c.q_for_alpha = required_trials(c.p, alpha).linearized;
    return c;
  }
};

struct MonteCarloCap {
  double p_hat = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% normal-approximation interval
  std::size_t hits = 0;
  std::size_t trials = 0;
};

/// Empirical cap probability: uniform unit vectors (normalized Gaussian
/// draws) mirrored into the dot>=0 hemisphere, counted against
/// d(y, e1) < epsilon. Refuses regimes where fewer than ~50 hits are
/// expected, since the estimate would be meaningless there.
inline MonteCarloCap monte_carlo_cap(std::size_t n, double epsilon, std::size_t trials,
                                     Rng& rng) {
  double p = cap_probability(n, epsilon);
  if (p * static_cast<double>(trials) < 50.0)
    throw ContractViolation(
        "monte_carlo_cap: infeasible regime, expected hits p*trials = " +
        std::to_string(p * static_cast<double>(trials)) + " < 50");

  std::vector<double> v(n);
  std::size_t hits = 0;
  const double threshold = 1.0 - epsilon;  // d < eps  <=>  cos > 1 - eps
  for (std::size_t t = 0; t < trials; ++t) {
    double norm2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
    double cosine = v[0] / std::sqrt(norm2);
    if (cosine < 0.0) cosine = -cosine;  // mirror into the hemisphere
    if (cosine > threshold) ++hits;
  }
  MonteCarloCap mc;
  mc.hits = hits;
  mc.trials = trials;
  mc.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  double se = std::sqrt(mc.p_hat * (1.0 - mc.p_hat) / static_cast<double>(trials));
  mc.ci_low = mc.p_hat - 1.96 * se;
  mc.ci_high = mc.p_hat + 1.96 * se;
  return mc;
}

}  // namespace daimon::attacks
