#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mdpgt/rng.hpp"
#include "mdpgt/vec.hpp"

namespace mdpgt {

enum class PolicyFamily { linear_gaussian, mlp_categorical };

PolicyFamily parse_policy_family(const std::string& name);
std::string to_string(PolicyFamily family);

/// pi(a|s) = N(theta^T phi(s), xi^2) with phi(s) the observation rescaled to
/// norm at most feature_clip. Sampled actions are clipped to
/// [-action_clip, action_clip] before reaching the environment.
struct LinearGaussianSpec {
  double xi = 1.0;
  double feature_clip = 1.0;
  double action_clip = 1.0;

  bool operator==(const LinearGaussianSpec&) const = default;
};

/// dense -> tanh -> dense -> tanh -> dense -> softmax
struct MlpCategoricalSpec {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  std::size_t n_actions = 3;

  bool operator==(const MlpCategoricalSpec&) const = default;
};

struct PolicyShape {
  PolicyFamily family = PolicyFamily::mlp_categorical;
  std::size_t obs_dim = 1;
  LinearGaussianSpec gaussian{};
  MlpCategoricalSpec mlp{};

  std::size_t dimension() const;
  void validate() const;
  bool operator==(const PolicyShape&) const = default;
};

struct PolicyParams {
  PolicyShape shape;
  Vec theta;

  PolicyParams() = default;
  PolicyParams(PolicyShape s, Vec t);
  std::size_t dimension() const noexcept { return theta.size(); }
};

/// Linear-Gaussian: theta = 0. MLP: every weight and bias drawn from
/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
PolicyParams init_params(const PolicyShape& shape, Rng& rng);

/// Linear-Gaussian features: the observation, scaled down to norm C_f if longer.
Vec gaussian_features(const LinearGaussianSpec& spec, std::span<const double> obs);

/// Raw action. For the Gaussian this is the unclipped draw (log-densities
/// and scores are always evaluated on it); for the categorical it is the
/// action index. Throws NumericFault for non-finite parameters.
double sample_action(const PolicyParams& params, std::span<const double> obs, Rng& rng);

struct ActionDraw {
  double action;
  double log_prob;  // equals log_prob(params, obs, action)
};

/// sample_action plus the log-probability of the drawn action, from a single
/// forward pass. Parameters are assumed finite.
ActionDraw draw_action(const PolicyParams& params, std::span<const double> obs, Rng& rng);

/// Action handed to the environment: the clipped value for the Gaussian,
/// the index for the categorical.
double env_action(const PolicyShape& shape, double raw_action);

/// log pi(a|s). Returns -infinity for a categorical action whose probability
/// underflows to zero.
double log_prob(const PolicyParams& params, std::span<const double> obs, double action);

/// grad_theta log pi(a|s).
Vec score(const PolicyParams& params, std::span<const double> obs, double action);

/// grad += scale * grad_theta log pi(a|s); returns log pi(a|s). The workhorse
/// of trajectory-level gradient estimators.
double accumulate_score(const PolicyParams& params, std::span<const double> obs, double action, double scale,
                        std::span<double> grad);

/// Softmax action probabilities of the categorical policy.
Vec action_probabilities(const PolicyParams& params, std::span<const double> obs);

struct ScoreBounds {
  double c_g;
  double c_h;
};

/// Bounds on ||grad log pi|| and ||hess log pi|| for the linear-Gaussian
/// policy when ||theta|| <= x_max and |a| <= C_a:
/// C_h = C_f^2 / xi^2, C_g = (C_a + C_f x_max) C_f / xi^2.
ScoreBounds score_bounds(const LinearGaussianSpec& spec, double x_max);

}  // namespace mdpgt
