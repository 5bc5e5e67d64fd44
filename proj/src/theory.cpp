#include "mdpgt/theory.hpp"

#include <cmath>
#include <limits>

#include "mdpgt/error.hpp"

namespace mdpgt {

void ProblemConstants::validate() const {
  if (!(c_g > 0.0 && c_h > 0.0 && reward_bound > 0.0)) throw ConfigError("C_g, C_h and R must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (horizon == 0 || n_agents == 0) throw ConfigError("horizon and agent count must be positive");
  if (!(is_variance >= 0.0) || !std::isfinite(is_variance))
    throw ConfigError("importance-weight variance bound M must be finite and nonnegative");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
}

DerivedConstants derive_constants(const ProblemConstants& pc) {
  pc.validate();
  const double one_minus = 1.0 - pc.gamma;
  const double sq = one_minus * one_minus;
  const auto h = static_cast<double>(pc.horizon);
  DerivedConstants dc{};
  dc.smoothness = pc.c_h * pc.reward_bound / sq;
  dc.gradient_bound = pc.c_g * pc.reward_bound / sq;
  dc.sigma_bar_sq = dc.gradient_bound * dc.gradient_bound;
  dc.c_upsilon = h * (2.0 * h * pc.c_g * pc.c_g + pc.c_h) * (pc.is_variance + 1.0);
  dc.d = 96.0 * dc.smoothness * dc.smoothness + 96.0 * dc.gradient_bound * dc.gradient_bound * dc.c_upsilon;
  return dc;
}

namespace {

double mixed_sq(const DerivedConstants& dc) {
  return dc.smoothness * dc.smoothness + dc.gradient_bound * dc.gradient_bound * dc.c_upsilon;
}

double weighted_sq(const DerivedConstants& dc) {
  return 12844.0 * dc.smoothness * dc.smoothness +
         9792.0 * dc.gradient_bound * dc.gradient_bound * dc.c_upsilon;
}

}  // namespace

EtaBound theorem1_eta_max(const DerivedConstants& dc, double lambda, std::size_t n_agents) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double gap = 1.0 - lambda * lambda;
  const auto n = static_cast<double>(n_agents);
  EtaBound b;
  b.terms[2] = 1.0 / (6.0 * std::sqrt(6.0 * mixed_sq(dc)));
  if (lambda == 0.0) {
    b.terms[0] = nan;
    b.terms[1] = nan;
    b.lambda_zero_dropped = n_agents > 1;
    b.value = b.terms[2];
    return b;
  }
  b.terms[0] = gap * gap / (lambda * std::sqrt(weighted_sq(dc)));
  b.terms[1] = std::sqrt(n * gap) * lambda / (31.0 * std::sqrt(mixed_sq(dc)));
  b.value = std::min({b.terms[0], b.terms[1], b.terms[2]});
  return b;
}

BetaChoice beta_from_eta(const DerivedConstants& dc, double eta, std::size_t n_agents) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  const double beta = dc.d * eta * eta / static_cast<double>(n_agents);
  return {beta, beta >= 1.0};
}

Schedule corollary1_schedule(const DerivedConstants& dc, std::size_t n_agents, std::size_t iterations,
                             double lambda) {
  if (iterations < 1) throw ConfigError("schedules need K >= 1");
  const auto n = static_cast<double>(n_agents);
  const auto k = static_cast<double>(iterations);
  const double l = dc.smoothness;
  Schedule s;
  s.eta = std::pow(n, 2.0 / 3.0) / (8.0 * l * std::cbrt(k));
  s.beta = dc.d * std::cbrt(n) / (64.0 * l * l * std::pow(k, 2.0 / 3.0));
  s.batch = static_cast<std::size_t>(std::max(1.0, std::ceil(std::cbrt(k) / std::pow(n, 2.0 / 3.0))));
  s.beta_out_of_range = s.beta >= 1.0;

  const double l3 = 512.0 * l * l * l;
  const double gap = 1.0 - lambda * lambda;
  double threshold = n * n * std::pow(dc.d, 1.5) / l3;
  if (lambda > 0.0) {
    threshold = std::max(threshold, 29791.0 * std::sqrt(n) * std::pow(mixed_sq(dc), 1.5) /
                                        (l3 * lambda * lambda * lambda * std::pow(gap, 1.5)));
  } else {
    s.threshold_degenerate = true;
  }
  threshold = std::max(threshold, std::pow(weighted_sq(dc), 1.5) * n * n * lambda * lambda * lambda /
                                      (l3 * std::pow(gap, 6.0)));
  s.k_threshold = threshold;
  s.below_threshold = k < threshold;
  return s;
}

Schedule corollary2_schedule(const DerivedConstants& dc, std::size_t n_agents, std::size_t iterations,
                             double lambda) {
  if (iterations < 1) throw ConfigError("schedules need K >= 1");
  const auto n = static_cast<double>(n_agents);
  const auto k = static_cast<double>(iterations);
  const double l = dc.smoothness;
  Schedule s;
  s.eta = std::pow(n, 0.75) / (8.0 * l * std::pow(k, 0.25));
  s.beta = dc.d * std::sqrt(n) / (64.0 * l * l * std::sqrt(k));
  s.batch = 1;
  s.beta_out_of_range = s.beta >= 1.0;

  const double l4 = 4096.0 * l * l * l * l;
  const double gap = 1.0 - lambda * lambda;
  const double lambda4 = lambda * lambda * lambda * lambda;
  double threshold = n * n * n * dc.d * dc.d / l4;
  if (lambda > 0.0) {
    const double m = mixed_sq(dc);
    threshold = std::max(threshold, 923521.0 * n * m * m / (l4 * gap * gap * lambda4));
  } else {
    s.threshold_degenerate = true;
  }
  const double w = weighted_sq(dc);
  threshold = std::max(threshold, w * w * lambda4 * n * n * n / (l4 * std::pow(gap, 8.0)));
  s.k_threshold = threshold;
  s.below_threshold = k < threshold;
  return s;
}

double steady_state_error(const DerivedConstants& dc, double beta, double lambda, std::size_t n_agents) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
  const double gap = 1.0 - lambda * lambda;
  return 8.0 * beta * dc.sigma_bar_sq / static_cast<double>(n_agents) +
         204.0 * lambda * lambda * beta * beta * dc.sigma_bar_sq / (gap * gap * gap);
}

namespace {

struct BracketTerms {
  double geometric, tail, cross;
};

BracketTerms bracket_terms(double gamma, std::size_t horizon) {
  const auto h = static_cast<double>(horizon);
  const double gh = std::pow(gamma, h);
  const double g2h = gh * gh;
  return {(1.0 - g2h) / (1.0 - gamma * gamma), h * g2h, 2.0 * gh * (1.0 - gh) / (1.0 - gamma)};
}

}  // namespace

double gaussian_variance_bracket(double gamma, std::size_t horizon) {
  const auto t = bracket_terms(gamma, horizon);
  return t.geometric + t.tail - t.cross;
}

double gaussian_variance_bracket_minus(double gamma, std::size_t horizon) {
  const auto t = bracket_terms(gamma, horizon);
  return t.geometric - t.tail - t.cross;
}

double gaussian_variance_bound(const LinearGaussianSpec& spec, double reward_bound, double gamma,
                               std::size_t horizon) {
  const double one_minus = 1.0 - gamma;
  return reward_bound * reward_bound * spec.feature_clip * spec.feature_clip /
         (one_minus * one_minus * spec.xi * spec.xi) * gaussian_variance_bracket(gamma, horizon);
}

GaussianConstants gaussian_constants(const LinearGaussianSpec& spec, double x_max, double reward_bound,
                                     double gamma, std::size_t horizon, double is_variance, std::size_t n_agents,
                                     double lambda) {
  const ScoreBounds sb = score_bounds(spec, x_max);
  GaussianConstants gc;
  gc.problem = ProblemConstants{sb.c_g, sb.c_h, reward_bound, gamma, horizon, is_variance, n_agents, lambda};
  gc.problem.validate();
  gc.variance_bracket = gaussian_variance_bracket(gamma, horizon);
  gc.variance_bracket_minus = gaussian_variance_bracket_minus(gamma, horizon);
  gc.variance_bound = gaussian_variance_bound(spec, reward_bound, gamma, horizon);
  return gc;
}

}  // namespace mdpgt
