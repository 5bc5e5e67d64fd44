#pragma once

#include <array>
#include <cstddef>

#include "mdpgt/policy.hpp"

namespace mdpgt {

/// Inputs of the convergence analysis.
struct ProblemConstants {
  double c_g = 1.0;           // bound on ||grad log pi||
  double c_h = 1.0;           // bound on ||hess log pi||
  double reward_bound = 1.0;  // R, |r| <= R
  double gamma = 0.99;
  std::size_t horizon = 1;
  double is_variance = 1.0;   // M, bound on the importance-weight variance
  std::size_t n_agents = 1;
  double lambda = 0.0;

  void validate() const;
};

struct DerivedConstants {
  double smoothness;         // L = C_h R / (1-gamma)^2
  double gradient_bound;     // G = C_g R / (1-gamma)^2
  double sigma_bar_sq;       // C_g^2 R^2 / (1-gamma)^4
  double c_upsilon;          // H (2 H C_g^2 + C_h) (M + 1)
  double d;                  // 96 L^2 + 96 G^2 C_upsilon
};

DerivedConstants derive_constants(const ProblemConstants& pc);

struct EtaBound {
  double value = 0.0;
  std::array<double, 3> terms{};       // NaN where a term does not apply
  bool lambda_zero_dropped = false;    // lambda = 0 with N > 1: only the third term is used
};

/// Largest step size admitted by the mini-batch convergence theorem.
EtaBound theorem1_eta_max(const DerivedConstants& dc, double lambda, std::size_t n_agents);

struct BetaChoice {
  double beta;
  bool out_of_range;  // beta >= 1: the theorem's hypotheses fail
};

/// beta = D eta^2 / N
BetaChoice beta_from_eta(const DerivedConstants& dc, double eta, std::size_t n_agents);

struct Schedule {
  double eta = 0.0;
  double beta = 0.0;
  std::size_t batch = 1;
  double k_threshold = 0.0;        // K above which the non-asymptotic rate is claimed
  bool below_threshold = false;    // K < k_threshold
  bool threshold_degenerate = false;  // lambda = 0: the lambda^-3 term is dropped
  bool beta_out_of_range = false;
};

/// eta = N^{2/3} / (8 L K^{1/3}), beta = D N^{1/3} / (64 L^2 K^{2/3}),
/// batch = ceil(K^{1/3} / N^{2/3}).
Schedule corollary1_schedule(const DerivedConstants& dc, std::size_t n_agents, std::size_t iterations,
                             double lambda);

/// Single-trajectory initialization: eta = N^{3/4} / (8 L K^{1/4}),
/// beta = D N^{1/2} / (64 L^2 K^{1/2}), batch = 1.
Schedule corollary2_schedule(const DerivedConstants& dc, std::size_t n_agents, std::size_t iterations,
                             double lambda);

/// Asymptotic error floor 8 beta sigma^2 / N + 204 lambda^2 beta^2 sigma^2 / (1-lambda^2)^3.
double steady_state_error(const DerivedConstants& dc, double beta, double lambda, std::size_t n_agents);

/// sum_{h<H} (gamma^h - gamma^H)^2 in closed form:
/// (1-gamma^{2H})/(1-gamma^2) + H gamma^{2H} - 2 gamma^H (1-gamma^H)/(1-gamma).
double gaussian_variance_bracket(double gamma, std::size_t horizon);

/// Same expression with the middle term subtracted instead of added; kept
/// for reporting only, since it goes negative (e.g. gamma = 0.9, H = 5).
double gaussian_variance_bracket_minus(double gamma, std::size_t horizon);

/// Variance bound of the causal estimator under the linear-Gaussian policy:
/// R^2 C_f^2 / ((1-gamma)^2 xi^2) * gaussian_variance_bracket(gamma, H).
double gaussian_variance_bound(const LinearGaussianSpec& spec, double reward_bound, double gamma,
                               std::size_t horizon);

struct GaussianConstants {
  ProblemConstants problem;
  double variance_bound;
  double variance_bracket;
  double variance_bracket_minus;
};

/// Problem constants of the linear-Gaussian policy family, C_g and C_h from
/// score_bounds.
GaussianConstants gaussian_constants(const LinearGaussianSpec& spec, double x_max, double reward_bound,
                                     double gamma, std::size_t horizon, double is_variance,
                                     std::size_t n_agents = 1, double lambda = 0.0);

}  // namespace mdpgt
