#include "mdpgt/gradient.hpp"

#include <cmath>
#include <limits>

#include "mdpgt/error.hpp"

namespace mdpgt {

Estimator parse_estimator(const std::string& name) {
  if (name == "pgt") return Estimator::pgt;
  if (name == "reinforce") return Estimator::reinforce;
  throw ConfigError("unknown estimator '" + name + "' (expected reinforce or pgt)");
}

std::string to_string(Estimator e) { return e == Estimator::pgt ? "pgt" : "reinforce"; }

Vec return_coefficients(const Trajectory& traj, Estimator estimator) {
  const std::size_t h_len = traj.size();
  Vec c(h_len);
  if (estimator == Estimator::reinforce) {
    const double ret = traj.discounted_return();
    std::fill(c.begin(), c.end(), ret);
    return c;
  }
  Vec discounted(h_len);
  double g = 1.0;
  for (std::size_t h = 0; h < h_len; ++h) {
    discounted[h] = g * traj.steps[h].reward;
    g *= traj.gamma;
  }
  double tail = 0.0;
  for (std::size_t h = h_len; h-- > 0;) {
    tail += discounted[h];
    c[h] = tail;
  }
  return c;
}

GradientEval evaluate_gradient(const Trajectory& traj, const PolicyParams& params, Estimator estimator) {
  if (traj.empty()) throw ConfigError("policy gradient of an empty trajectory");
  const Vec c = return_coefficients(traj, estimator);
  GradientEval out{Vec(params.dimension(), 0.0), 0.0};
  for (std::size_t h = 0; h < traj.size(); ++h) {
    const auto& st = traj.steps[h];
    out.log_prob_sum += accumulate_score(params, st.obs, st.action, c[h], out.grad);
  }
  return out;
}

Vec pg_estimate(const Trajectory& traj, const PolicyParams& params, Estimator estimator) {
  return evaluate_gradient(traj, params, estimator).grad;
}

ImportanceWeight importance_weight_from_log(double log_numerator, double log_denominator) {
  if (std::isnan(log_numerator) || std::isnan(log_denominator))
    throw NumericFault("importance weight of NaN log-probabilities");
  if (log_denominator == -std::numeric_limits<double>::infinity())
    throw NumericFault("trajectory has zero probability under its sampling policy");
  if (log_numerator == -std::numeric_limits<double>::infinity()) return {0.0, false, true};
  double lw = log_numerator - log_denominator;
  bool clamped = false;
  if (lw > kLogWeightClamp) {
    lw = kLogWeightClamp;
    clamped = true;
  } else if (lw < -kLogWeightClamp) {
    lw = -kLogWeightClamp;
    clamped = true;
  }
  return {std::exp(lw), clamped, false};
}

ImportanceWeight importance_weight(const Trajectory& traj, const PolicyParams& params_new,
                                   const PolicyParams& params_old) {
  if (params_new.shape.family != params_old.shape.family || params_new.dimension() != params_old.dimension())
    throw ConfigError("importance weight between policies of different shape");
  double log_old = 0.0;
  double log_new = 0.0;
  for (const auto& st : traj.steps) {
    log_old += log_prob(params_old, st.obs, st.action);
    log_new += log_prob(params_new, st.obs, st.action);
  }
  if (params_new.theta == params_old.theta) log_old = log_new;
  return importance_weight_from_log(log_old, log_new);
}

Vec surrogate_combine(const Vec& u_prev, const Vec& g_new, const Vec& g_old, double weight, double beta) {
  if (u_prev.size() != g_new.size() || g_old.size() != g_new.size())
    throw ConfigError("surrogate dimension mismatch");
  Vec u(g_new.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = beta * g_new[i] + (1.0 - beta) * (u_prev[i] + g_new[i] - weight * g_old[i]);
  return u;
}

Surrogate surrogate_update(const Surrogate& s, const Trajectory& traj, const PolicyParams& params_k, double beta,
                           Estimator estimator, SurrogateDiagnostics* diag) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("momentum coefficient beta must lie in (0, 1]");
  const std::size_t d = params_k.dimension();
  if (s.u.size() != d || s.params_prev.size() != d) throw ConfigError("surrogate dimension mismatch");

  GradientEval now = evaluate_gradient(traj, params_k, estimator);
  Surrogate out;
  out.u_prev = s.u;
  out.params_prev = params_k.theta;
  if (diag) *diag = SurrogateDiagnostics{};

  if (beta == 1.0) {
    out.u = std::move(now.grad);
    return out;
  }

  const PolicyParams previous(params_k.shape, s.params_prev);
  const GradientEval before = evaluate_gradient(traj, previous, estimator);
  const ImportanceWeight w = s.params_prev == params_k.theta
                                 ? ImportanceWeight{}
                                 : importance_weight_from_log(before.log_prob_sum, now.log_prob_sum);
  if (diag) {
    diag->weight = w.value;
    diag->clamp_events = w.clamped ? 1 : 0;
    diag->zero_weight = w.zero_numerator;
  }

  double correction_sq = 0.0;
  for (double g : before.grad) correction_sq += (w.value * g) * (w.value * g);
  if (!std::isfinite(correction_sq) || std::sqrt(correction_sq) > 1e12)
    throw NumericFault("importance-weighted correction blew up (weight " + std::to_string(w.value) +
                       ", norm " + std::to_string(std::sqrt(correction_sq)) + ")");

  out.u = surrogate_combine(s.u, now.grad, before.grad, w.value, beta);
  if (!all_finite(out.u)) throw NumericFault("surrogate update produced non-finite values");
  return out;
}

Surrogate init_surrogate(const PolicyParams& params_0, std::span<const Trajectory> batch, Estimator estimator) {
  if (batch.empty()) throw ConfigError("initialization batch must hold at least one trajectory");
  std::vector<Vec> grads;
  grads.reserve(batch.size());
  for (const auto& t : batch) grads.push_back(pg_estimate(t, params_0, estimator));
  Surrogate s;
  s.u = batch.size() == 1 ? std::move(grads.front()) : mean_of(grads);
  s.u_prev.assign(params_0.dimension(), 0.0);
  s.params_prev = params_0.theta;
  return s;
}

}  // namespace mdpgt
