#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdpgt/policy.hpp"
#include "mdpgt/rng.hpp"
#include "mdpgt/vec.hpp"

namespace mdpgt {

enum class EnvKind { lineworld, gridworld };

EnvKind parse_env_kind(const std::string& name);
std::string to_string(EnvKind kind);

/// Lineworld: cells -world_size..world_size, every agent heads for 0, actions
/// {down, stay, up}, agents never share a cell.
/// Gridworld: world_size x world_size cells, one goal per agent, actions
/// {up, down, left, right}, agents may overlap and are penalized for it.
struct EnvConfig {
  EnvKind kind = EnvKind::lineworld;
  std::size_t n_agents = 1;
  int world_size = 5;
  std::size_t horizon = 50;
  double gamma = 0.99;
  double collision_penalty = 1.0;

  void validate() const;
  std::size_t obs_dim() const;
  std::size_t n_actions() const;
  std::size_t cell_count() const;
  /// Largest |reward| any step can produce: world diameter plus the collision
  /// penalty.
  double reward_bound() const;
  bool operator==(const EnvConfig&) const = default;
};

using Cell = std::array<int, 2>;

struct EnvState {
  std::vector<Cell> positions;
  std::vector<Cell> goals;
  std::size_t step = 0;
};

/// Goals for a run. Lineworld: the origin for everyone. Gridworld: distinct
/// cells drawn once from the run seed and kept for every episode.
std::vector<Cell> make_goals(const EnvConfig& cfg, std::uint64_t seed);

/// Distinct uniformly random start cells. Throws ConfigError when the world
/// has fewer cells than agents.
EnvState reset(const EnvConfig& cfg, std::vector<Cell> goals, Rng& rng);

/// Applies one joint action in place and returns per-agent rewards.
/// Throws ConfigError for an action index outside the action set.
Vec step(const EnvConfig& cfg, EnvState& state, std::span<const int> joint_action);

/// All agents' positions scaled to [-1, 1], the observing agent's first and
/// the rest in index order.
Vec observe(const EnvConfig& cfg, const EnvState& state, std::size_t agent);

/// Maps a raw policy action onto the environment's action index.
int to_env_action(const EnvConfig& cfg, const PolicyShape& shape, double raw_action);

struct TrajectoryStep {
  Vec obs;
  double action;    // raw policy action (Gaussian draw before clipping)
  double reward;
  double log_prob;  // log pi(action | obs) at sampling time
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double gamma = 0.99;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  /// sum_h gamma^h r_h
  double discounted_return() const;
  double total_reward() const;
};

/// Identifies the episode being sampled: iteration and mini-batch slot under
/// a root seed. Each (agent, episode) pair owns its action stream.
struct EpisodeKey {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  std::uint64_t batch = 0;
};

/// Rolls the joint policy for `horizon` steps from a fresh reset. All agents
/// see the same state sequence; one Trajectory is returned per agent.
std::vector<Trajectory> sample_trajectory(const EnvConfig& cfg, std::span<const PolicyParams> policies,
                                          const EpisodeKey& key);

/// Policy shape matching the environment's observation and action spaces.
PolicyShape policy_shape_for(const EnvConfig& cfg, PolicyShape base);

}  // namespace mdpgt
