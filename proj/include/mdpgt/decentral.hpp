#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdpgt/envsim.hpp"
#include "mdpgt/gradient.hpp"
#include "mdpgt/policy.hpp"
#include "mdpgt/topology.hpp"

namespace mdpgt {

enum class Algorithm { dpg, mdpg, mdpgt };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

/// Numerical settings of one training run.
struct TrainConfig {
  EnvConfig env{};
  double eta = 1e-3;
  double beta = 0.5;
  std::size_t batch_init = 1;
  Estimator estimator = Estimator::pgt;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // per-agent work within an iteration
};

struct AgentState {
  Vec x;
  Surrogate surrogate;
  Vec v;  // gradient tracker, MDPGT only
};

struct SwarmState {
  std::vector<AgentState> agents;
  std::size_t k = 0;
  MixingMatrix w;
  PolicyShape shape;

  std::vector<PolicyParams> policies() const;
};

/// Per-iteration diagnostics. Quantities refer to iterate k: the
/// trajectories sampled under x_k, the surrogates u_k and the consensus error
/// of x_k.
struct StepReport {
  std::size_t k = 0;
  Vec episode_rewards;  // undiscounted episode reward per agent
  double mean_reward = 0.0;
  double consensus_error = 0.0;    // ||x_k - Lambda x_k||^2
  double tracking_residual = 0.0;  // ||mean v_{k+1} - mean u_k||, 0 without tracker
  double tracking_relative = 0.0;  // tracking_residual / (1 + ||mean u_k||)
  double u_norm = 0.0;             // ||mean u_k||
  std::vector<std::size_t> clamps;
};

/// Shared initialization: u_0 from a mini-batch of cfg.batch_init episodes
/// under x_0, v_1 = W v_0 + u_0 - u_{-1} (MDPGT), x_1 = W (x_0 + eta d) with
/// d = v_1 for MDPGT and u_0 otherwise. Every agent must start from the same
/// parameter vector. Returns the state at k = 1.
SwarmState init_swarm(Algorithm algo, std::span<const PolicyParams> policies, MixingMatrix w,
                      const TrainConfig& cfg, StepReport* report = nullptr);

inline SwarmState mdpgt_init(std::span<const PolicyParams> policies, MixingMatrix w, const TrainConfig& cfg,
                             StepReport* report = nullptr) {
  return init_swarm(Algorithm::mdpgt, policies, std::move(w), cfg, report);
}

/// u_k from the hybrid surrogate, v_{k+1} = W v_k + u_k - u_{k-1},
/// x_{k+1} = W (x_k + eta v_{k+1}).
StepReport mdpgt_step(SwarmState& s, const TrainConfig& cfg);

/// u_k from the hybrid surrogate, x_{k+1} = W (x_k + eta u_k).
StepReport mdpg_step(SwarmState& s, const TrainConfig& cfg);

/// u_k = g(tau_k | x_k), x_{k+1} = W (x_k + eta u_k).
StepReport dpg_step(SwarmState& s, const TrainConfig& cfg);

StepReport step(Algorithm algo, SwarmState& s, const TrainConfig& cfg);

/// Throws NumericFault when any parameter is non-finite or an agent's
/// parameter norm exceeds 1e6.
void check_divergence(const SwarmState& s);

struct RunResult {
  std::vector<StepReport> records;
  std::optional<SwarmState> final_state;
  Vec output_params;  // x~_K, uniform over (agent, k) with k = 1..K
  std::size_t output_agent = 0;
  std::size_t output_iteration = 0;
  bool aborted = false;
  std::string failure;
};

/// K iterations (k = 0..K-1, one record each); the final state holds x_K.
/// A NumericFault aborts the run: records emitted so far are kept and
/// `failure` describes the fault.
RunResult run(Algorithm algo, std::span<const PolicyParams> policies, const MixingMatrix& w, const TrainConfig& cfg,
              std::size_t iterations, const std::function<void(const StepReport&)>& on_record = {});

/// Identical initial policies for every agent, drawn from the run seed.
std::vector<PolicyParams> initial_policies(const PolicyShape& shape, std::size_t n_agents, std::uint64_t seed);

}  // namespace mdpgt
