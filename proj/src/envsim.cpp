#include "mdpgt/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mdpgt/error.hpp"

namespace mdpgt {

EnvKind parse_env_kind(const std::string& name) {
  if (name == "lineworld") return EnvKind::lineworld;
  if (name == "gridworld") return EnvKind::gridworld;
  throw ConfigError("unknown env '" + name + "' (expected lineworld or gridworld)");
}

std::string to_string(EnvKind kind) { return kind == EnvKind::lineworld ? "lineworld" : "gridworld"; }

void EnvConfig::validate() const {
  if (n_agents == 0) throw ConfigError("env needs at least one agent");
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (kind == EnvKind::lineworld && world_size < 1) throw ConfigError("lineworld half-width must be >= 1");
  if (kind == EnvKind::gridworld && world_size < 2) throw ConfigError("gridworld side must be >= 2");
  if (!(collision_penalty >= 0.0) || !std::isfinite(collision_penalty))
    throw ConfigError("collision penalty must be finite and nonnegative");
}

std::size_t EnvConfig::obs_dim() const { return n_agents * (kind == EnvKind::lineworld ? 1 : 2); }

std::size_t EnvConfig::n_actions() const { return kind == EnvKind::lineworld ? 3 : 4; }

std::size_t EnvConfig::cell_count() const {
  const auto s = static_cast<std::size_t>(world_size);
  return kind == EnvKind::lineworld ? 2 * s + 1 : s * s;
}

double EnvConfig::reward_bound() const {
  const double diameter = kind == EnvKind::lineworld ? 2.0 * world_size : std::sqrt(2.0) * (world_size - 1);
  return diameter + collision_penalty;
}

namespace {

Cell cell_from_index(const EnvConfig& cfg, std::size_t idx) {
  if (cfg.kind == EnvKind::lineworld) return {static_cast<int>(idx) - cfg.world_size, 0};
  const auto s = static_cast<std::size_t>(cfg.world_size);
  return {static_cast<int>(idx % s), static_cast<int>(idx / s)};
}

std::vector<Cell> distinct_cells(const EnvConfig& cfg, std::size_t count, Rng& rng) {
  const std::size_t cells = cfg.cell_count();
  if (count > cells)
    throw ConfigError("cannot place " + std::to_string(count) + " agents on " + std::to_string(cells) +
                      " cells");
  std::uniform_int_distribution<std::size_t> pick(0, cells - 1);
  std::set<std::size_t> used;
  std::vector<Cell> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t idx = pick(rng);
    if (used.insert(idx).second) out.push_back(cell_from_index(cfg, idx));
  }
  return out;
}

double distance(const Cell& a, const Cell& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

Cell move(const EnvConfig& cfg, Cell c, int action) {
  if (cfg.kind == EnvKind::lineworld) {
    c[0] = std::clamp(c[0] + (action - 1), -cfg.world_size, cfg.world_size);
    return c;
  }
  static constexpr int dx[] = {0, 0, -1, 1};
  static constexpr int dy[] = {1, -1, 0, 0};
  c[0] = std::clamp(c[0] + dx[action], 0, cfg.world_size - 1);
  c[1] = std::clamp(c[1] + dy[action], 0, cfg.world_size - 1);
  return c;
}

}  // namespace

std::vector<Cell> make_goals(const EnvConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.kind == EnvKind::lineworld) return std::vector<Cell>(cfg.n_agents, Cell{0, 0});
  Rng rng = make_stream({seed, StreamPurpose::env_reset, std::numeric_limits<std::uint64_t>::max(), 0, 0});
  return distinct_cells(cfg, cfg.n_agents, rng);
}

EnvState reset(const EnvConfig& cfg, std::vector<Cell> goals, Rng& rng) {
  cfg.validate();
  if (goals.size() != cfg.n_agents) throw ConfigError("one goal per agent required");
  EnvState s;
  s.positions = distinct_cells(cfg, cfg.n_agents, rng);
  s.goals = std::move(goals);
  return s;
}

Vec step(const EnvConfig& cfg, EnvState& state, std::span<const int> joint_action) {
  const std::size_t n = cfg.n_agents;
  if (joint_action.size() != n) throw ConfigError("joint action must hold one action per agent");
  for (int a : joint_action)
    if (a < 0 || static_cast<std::size_t>(a) >= cfg.n_actions())
      throw ConfigError("action index " + std::to_string(a) + " outside the action set");

  std::vector<bool> collided(n, false);
  if (cfg.kind == EnvKind::lineworld) {
    // Agents move in index order; a mover whose target is held by another
    // agent (already moved or not yet moved) is blocked and is the collider.
    for (std::size_t i = 0; i < n; ++i) {
      const Cell target = move(cfg, state.positions[i], joint_action[i]);
      if (target == state.positions[i]) continue;
      bool occupied = false;
      for (std::size_t j = 0; j < n && !occupied; ++j) occupied = j != i && state.positions[j] == target;
      if (occupied)
        collided[i] = true;
      else
        state.positions[i] = target;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) state.positions[i] = move(cfg, state.positions[i], joint_action[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && state.positions[i] == state.positions[j]) collided[i] = true;
  }

  Vec rewards(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = -distance(state.positions[i], state.goals[i]);
    if (collided[i]) rewards[i] -= cfg.collision_penalty;
  }
  ++state.step;
  return rewards;
}

Vec observe(const EnvConfig& cfg, const EnvState& state, std::size_t agent) {
  const std::size_t n = state.positions.size();
  if (agent >= n) throw ConfigError("agent index out of range");
  const bool line = cfg.kind == EnvKind::lineworld;
  auto scale = [&](int c) {
    return line ? static_cast<double>(c) / cfg.world_size : 2.0 * c / (cfg.world_size - 1) - 1.0;
  };
  Vec obs;
  obs.reserve(cfg.obs_dim());
  auto push = [&](const Cell& c) {
    obs.push_back(scale(c[0]));
    if (!line) obs.push_back(scale(c[1]));
  };
  push(state.positions[agent]);
  for (std::size_t j = 0; j < n; ++j)
    if (j != agent) push(state.positions[j]);
  return obs;
}

int to_env_action(const EnvConfig& cfg, const PolicyShape& shape, double raw_action) {
  if (shape.family == PolicyFamily::mlp_categorical) return static_cast<int>(raw_action);
  if (cfg.kind != EnvKind::lineworld) throw ConfigError("the linear-Gaussian policy drives lineworld only");
  const double a = env_action(shape, raw_action) / shape.gaussian.action_clip;
  return static_cast<int>(std::lround(a)) + 1;
}

double Trajectory::discounted_return() const {
  double g = 1.0;
  double s = 0.0;
  for (const auto& st : steps) {
    s += g * st.reward;
    g *= gamma;
  }
  return s;
}

double Trajectory::total_reward() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s;
}

std::vector<Trajectory> sample_trajectory(const EnvConfig& cfg, std::span<const PolicyParams> policies,
                                          const EpisodeKey& key) {
  cfg.validate();
  const std::size_t n = cfg.n_agents;
  if (policies.size() != n) throw ConfigError("one policy per agent required");
  for (const auto& p : policies) {
    if (p.shape.obs_dim != cfg.obs_dim()) throw ConfigError("policy observation size does not match env");
    if (p.shape.family == PolicyFamily::mlp_categorical && p.shape.mlp.n_actions != cfg.n_actions())
      throw ConfigError("policy action count does not match env");
    if (!all_finite(p.theta)) throw NumericFault("policy parameters contain non-finite values");
  }

  Rng reset_rng = make_stream({key.seed, StreamPurpose::env_reset, key.iteration, 0, key.batch});
  EnvState state = reset(cfg, make_goals(cfg, key.seed), reset_rng);
  std::vector<Rng> action_rng;
  action_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    action_rng.push_back(make_stream({key.seed, StreamPurpose::action, key.iteration, i, key.batch}));

  std::vector<Trajectory> out(n);
  for (auto& t : out) {
    t.gamma = cfg.gamma;
    t.steps.reserve(cfg.horizon);
  }
  std::vector<int> joint(n);
  for (std::size_t h = 0; h < cfg.horizon; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      Vec obs = observe(cfg, state, i);
      const ActionDraw d = draw_action(policies[i], obs, action_rng[i]);
      joint[i] = to_env_action(cfg, policies[i].shape, d.action);
      out[i].steps.push_back({std::move(obs), d.action, 0.0, d.log_prob});
    }
    const Vec r = step(cfg, state, joint);
    for (std::size_t i = 0; i < n; ++i) out[i].steps.back().reward = r[i];
  }
  return out;
}

PolicyShape policy_shape_for(const EnvConfig& cfg, PolicyShape base) {
  base.obs_dim = cfg.obs_dim();
  base.mlp.n_actions = cfg.n_actions();
  base.validate();
  return base;
}

}  // namespace mdpgt
