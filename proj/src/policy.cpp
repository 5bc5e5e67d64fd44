#include "mdpgt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mdpgt/error.hpp"

namespace mdpgt {

PolicyFamily parse_policy_family(const std::string& name) {
  if (name == "linear_gaussian" || name == "gaussian") return PolicyFamily::linear_gaussian;
  if (name == "mlp_categorical" || name == "mlp") return PolicyFamily::mlp_categorical;
  throw ConfigError("unknown policy family '" + name + "' (expected linear_gaussian or mlp_categorical)");
}

std::string to_string(PolicyFamily family) {
  return family == PolicyFamily::linear_gaussian ? "linear_gaussian" : "mlp_categorical";
}

std::size_t PolicyShape::dimension() const {
  if (family == PolicyFamily::linear_gaussian) return obs_dim;
  const std::size_t h1 = mlp.hidden1, h2 = mlp.hidden2, a = mlp.n_actions;
  return h1 * obs_dim + h1 + h2 * h1 + h2 + a * h2 + a;
}

void PolicyShape::validate() const {
  if (obs_dim == 0) throw ConfigError("policy observation dimension must be positive");
  if (family == PolicyFamily::linear_gaussian) {
    if (!(gaussian.xi > 0.0)) throw ConfigError("Gaussian policy std-dev xi must be positive");
    if (!(gaussian.feature_clip > 0.0)) throw ConfigError("feature bound C_f must be positive");
    if (!(gaussian.action_clip > 0.0)) throw ConfigError("action bound C_a must be positive");
  } else {
    if (mlp.hidden1 == 0 || mlp.hidden2 == 0) throw ConfigError("MLP hidden widths must be positive");
    if (mlp.n_actions < 2) throw ConfigError("categorical policy needs at least two actions");
  }
}

PolicyParams::PolicyParams(PolicyShape s, Vec t) : shape(s), theta(std::move(t)) {
  shape.validate();
  if (theta.size() != shape.dimension())
    throw ConfigError("parameter vector has " + std::to_string(theta.size()) + " entries, shape needs " +
                      std::to_string(shape.dimension()));
}

namespace {

// Views into the flat MLP parameter vector. Weight matrices are row-major
// (out x in) and each is followed by its bias.
struct MlpLayout {
  std::size_t in, h1, h2, out;
  std::size_t w1, b1, w2, b2, w3, b3;

  explicit MlpLayout(const PolicyShape& s)
      : in(s.obs_dim), h1(s.mlp.hidden1), h2(s.mlp.hidden2), out(s.mlp.n_actions) {
    w1 = 0;
    b1 = w1 + h1 * in;
    w2 = b1 + h1;
    b2 = w2 + h2 * h1;
    w3 = b2 + h2;
    b3 = w3 + out * h2;
  }
};

struct MlpForward {
  Vec hidden1, hidden2, log_probs;
};

void dense(const double* w, const double* b, std::span<const double> x, std::size_t out, double* y) {
  const std::size_t in = x.size();
  for (std::size_t r = 0; r < out; ++r) {
    double s = b[r];
    const double* row = w + r * in;
    for (std::size_t c = 0; c < in; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

MlpForward mlp_forward(const PolicyParams& p, std::span<const double> obs) {
  const MlpLayout l(p.shape);
  const double* th = p.theta.data();
  MlpForward f{Vec(l.h1), Vec(l.h2), Vec(l.out)};
  dense(th + l.w1, th + l.b1, obs, l.h1, f.hidden1.data());
  for (double& v : f.hidden1) v = std::tanh(v);
  dense(th + l.w2, th + l.b2, f.hidden1, l.h2, f.hidden2.data());
  for (double& v : f.hidden2) v = std::tanh(v);
  dense(th + l.w3, th + l.b3, f.hidden2, l.out, f.log_probs.data());
  const double zmax = *std::max_element(f.log_probs.begin(), f.log_probs.end());
  double s = 0.0;
  for (double z : f.log_probs) s += std::exp(z - zmax);
  const double lse = zmax + std::log(s);
  for (double& z : f.log_probs) z -= lse;
  return f;
}

std::size_t action_index(const PolicyShape& shape, double action) {
  const double r = std::round(action);
  if (r != action || r < 0.0 || r >= static_cast<double>(shape.mlp.n_actions))
    throw ConfigError("action " + std::to_string(action) + " is not in the categorical action set");
  return static_cast<std::size_t>(r);
}

double gaussian_mean(const PolicyParams& p, std::span<const double> phi) { return dot(p.theta, phi); }

double gaussian_log_density(double a, double mean, double xi) {
  const double z = (a - mean) / xi;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(xi) - 0.5 * z * z;
}

void check_obs(const PolicyShape& shape, std::span<const double> obs) {
  if (obs.size() != shape.obs_dim)
    throw ConfigError("observation has dimension " + std::to_string(obs.size()) + ", policy expects " +
                      std::to_string(shape.obs_dim));
}

}  // namespace

PolicyParams init_params(const PolicyShape& shape, Rng& rng) {
  shape.validate();
  Vec theta(shape.dimension(), 0.0);
  if (shape.family == PolicyFamily::mlp_categorical) {
    const MlpLayout l(shape);
    auto fill = [&](std::size_t from, std::size_t to, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (std::size_t i = from; i < to; ++i) theta[i] = u(rng);
    };
    fill(l.w1, l.w2, l.in);
    fill(l.w2, l.w3, l.h1);
    fill(l.w3, theta.size(), l.h2);
  }
  return PolicyParams(shape, std::move(theta));
}

Vec gaussian_features(const LinearGaussianSpec& spec, std::span<const double> obs) {
  Vec phi(obs.begin(), obs.end());
  const double n = norm(phi);
  if (n > spec.feature_clip) {
    const double scale = spec.feature_clip / n;
    for (double& v : phi) v *= scale;
  }
  return phi;
}

Vec action_probabilities(const PolicyParams& params, std::span<const double> obs) {
  check_obs(params.shape, obs);
  MlpForward f = mlp_forward(params, obs);
  for (double& v : f.log_probs) v = std::exp(v);
  return f.log_probs;
}

ActionDraw draw_action(const PolicyParams& params, std::span<const double> obs, Rng& rng) {
  check_obs(params.shape, obs);
  if (params.shape.family == PolicyFamily::linear_gaussian) {
    const auto& g = params.shape.gaussian;
    const Vec phi = gaussian_features(g, obs);
    const double mean = gaussian_mean(params, phi);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double a = mean + g.xi * noise(rng);
    return {a, gaussian_log_density(a, mean, g.xi)};
  }
  const MlpForward f = mlp_forward(params, obs);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double cum = 0.0;
  for (std::size_t a = 0; a < f.log_probs.size(); ++a) {
    cum += std::exp(f.log_probs[a]);
    if (draw < cum) return {static_cast<double>(a), f.log_probs[a]};
  }
  // Rounding left the cumulative sum just below 1; take the last action
  // that has nonzero mass.
  for (std::size_t a = f.log_probs.size(); a-- > 0;)
    if (std::isfinite(f.log_probs[a])) return {static_cast<double>(a), f.log_probs[a]};
  throw NumericFault("categorical policy has no action with nonzero probability");
}

double sample_action(const PolicyParams& params, std::span<const double> obs, Rng& rng) {
  if (!all_finite(params.theta)) throw NumericFault("policy parameters contain non-finite values");
  return draw_action(params, obs, rng).action;
}

double env_action(const PolicyShape& shape, double raw_action) {
  if (shape.family == PolicyFamily::linear_gaussian)
    return std::clamp(raw_action, -shape.gaussian.action_clip, shape.gaussian.action_clip);
  return raw_action;
}

double accumulate_score(const PolicyParams& params, std::span<const double> obs, double action, double scale,
                        std::span<double> grad) {
  check_obs(params.shape, obs);
  if (params.shape.family == PolicyFamily::linear_gaussian) {
    const auto& g = params.shape.gaussian;
    const Vec phi = gaussian_features(g, obs);
    const double mean = gaussian_mean(params, phi);
    if (scale != 0.0) axpy(scale * (action - mean) / (g.xi * g.xi), phi, grad);
    return gaussian_log_density(action, mean, g.xi);
  }

  const MlpLayout l(params.shape);
  const std::size_t a = action_index(params.shape, action);
  const MlpForward f = mlp_forward(params, obs);
  const double lp = f.log_probs[a];
  if (scale == 0.0 || !std::isfinite(lp)) return lp;

  const double* th = params.theta.data();
  double* gr = grad.data();

  // d log softmax_a / d logits = onehot(a) - p
  Vec d_out(l.out);
  for (std::size_t k = 0; k < l.out; ++k) d_out[k] = scale * ((k == a ? 1.0 : 0.0) - std::exp(f.log_probs[k]));

  Vec d_h2(l.h2, 0.0);
  for (std::size_t r = 0; r < l.out; ++r) {
    const double d = d_out[r];
    gr[l.b3 + r] += d;
    double* gw = gr + l.w3 + r * l.h2;
    const double* w = th + l.w3 + r * l.h2;
    for (std::size_t c = 0; c < l.h2; ++c) {
      gw[c] += d * f.hidden2[c];
      d_h2[c] += d * w[c];
    }
  }
  for (std::size_t c = 0; c < l.h2; ++c) d_h2[c] *= 1.0 - f.hidden2[c] * f.hidden2[c];

  Vec d_h1(l.h1, 0.0);
  for (std::size_t r = 0; r < l.h2; ++r) {
    const double d = d_h2[r];
    gr[l.b2 + r] += d;
    double* gw = gr + l.w2 + r * l.h1;
    const double* w = th + l.w2 + r * l.h1;
    for (std::size_t c = 0; c < l.h1; ++c) {
      gw[c] += d * f.hidden1[c];
      d_h1[c] += d * w[c];
    }
  }
  for (std::size_t c = 0; c < l.h1; ++c) d_h1[c] *= 1.0 - f.hidden1[c] * f.hidden1[c];

  for (std::size_t r = 0; r < l.h1; ++r) {
    const double d = d_h1[r];
    gr[l.b1 + r] += d;
    double* gw = gr + l.w1 + r * l.in;
    for (std::size_t c = 0; c < l.in; ++c) gw[c] += d * obs[c];
  }
  return lp;
}

double log_prob(const PolicyParams& params, std::span<const double> obs, double action) {
  check_obs(params.shape, obs);
  if (params.shape.family == PolicyFamily::linear_gaussian) {
    const Vec phi = gaussian_features(params.shape.gaussian, obs);
    return gaussian_log_density(action, gaussian_mean(params, phi), params.shape.gaussian.xi);
  }
  const std::size_t a = action_index(params.shape, action);
  const double lp = mlp_forward(params, obs).log_probs[a];
  return std::isnan(lp) ? -std::numeric_limits<double>::infinity() : lp;
}

Vec score(const PolicyParams& params, std::span<const double> obs, double action) {
  Vec g(params.dimension(), 0.0);
  accumulate_score(params, obs, action, 1.0, g);
  return g;
}

ScoreBounds score_bounds(const LinearGaussianSpec& spec, double x_max) {
  const double xi2 = spec.xi * spec.xi;
  return {(spec.action_clip + spec.feature_clip * x_max) * spec.feature_clip / xi2,
          spec.feature_clip * spec.feature_clip / xi2};
}

}  // namespace mdpgt
