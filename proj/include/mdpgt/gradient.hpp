#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mdpgt/envsim.hpp"
#include "mdpgt/policy.hpp"
#include "mdpgt/vec.hpp"

namespace mdpgt {

/// reinforce: (sum_h score_h) * (sum_h gamma^h r_h).
/// pgt: sum_h score_h * (sum_{q >= h} gamma^q r_q), zero baseline.
enum class Estimator { reinforce, pgt };

Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);

/// Per-step weights multiplying score_h in the chosen estimator.
Vec return_coefficients(const Trajectory& traj, Estimator estimator);

struct GradientEval {
  Vec grad;
  double log_prob_sum = 0.0;  // sum_h log pi(a_h | s_h) under the evaluated params
};

/// One pass over the trajectory producing both g(tau | params) and
/// log p(tau | params) up to the params-independent dynamics term.
GradientEval evaluate_gradient(const Trajectory& traj, const PolicyParams& params, Estimator estimator);

/// g(tau | params). Throws ConfigError for an empty trajectory.
Vec pg_estimate(const Trajectory& traj, const PolicyParams& params, Estimator estimator = Estimator::pgt);

// log-weights are clamped to [-50, 50]
inline constexpr double kLogWeightClamp = 50.0;

struct ImportanceWeight {
  double value = 1.0;
  bool clamped = false;
  bool zero_numerator = false;  // numerator policy assigns the trajectory zero probability
};

/// exp(log_numerator - log_denominator), clamped. A -inf numerator yields
/// weight 0 with a flag; a -inf denominator throws NumericFault.
ImportanceWeight importance_weight_from_log(double log_numerator, double log_denominator);

/// p(tau | params_old) / p(tau | params_new), evaluated in log space.
ImportanceWeight importance_weight(const Trajectory& traj, const PolicyParams& params_new,
                                   const PolicyParams& params_old);

/// Recursive policy-gradient surrogate of one agent.
struct Surrogate {
  Vec u;            // u_k
  Vec u_prev;       // u_{k-1}
  Vec params_prev;  // x_k at the time u_k was formed; x_{k-1} for the next update
};

struct SurrogateDiagnostics {
  double weight = 1.0;
  std::size_t clamp_events = 0;
  bool zero_weight = false;
};

/// beta g_new + (1 - beta) (u_prev + g_new - weight g_old), elementwise.
Vec surrogate_combine(const Vec& u_prev, const Vec& g_new, const Vec& g_old, double weight, double beta);

/// u_k = beta g(tau|x_k) + (1 - beta) [u_{k-1} + g(tau|x_k) - w g(tau|x_{k-1})]
/// with w = p(tau|x_{k-1}) / p(tau|x_k). `traj` must be sampled under
/// params_k. Throws ConfigError for beta outside (0, 1] and NumericFault
/// when the weighted correction is non-finite or exceeds 1e12 in norm.
Surrogate surrogate_update(const Surrogate& s, const Trajectory& traj, const PolicyParams& params_k, double beta,
                           Estimator estimator = Estimator::pgt, SurrogateDiagnostics* diag = nullptr);

/// u_0 = mean of g(tau_m | x_0) over the batch, u_{-1} = 0, params_prev = x_0.
Surrogate init_surrogate(const PolicyParams& params_0, std::span<const Trajectory> batch,
                         Estimator estimator = Estimator::pgt);

}  // namespace mdpgt
