#include "mdpgt/decentral.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mdpgt/error.hpp"
#include "mdpgt/rng.hpp"

namespace mdpgt {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "dpg") return Algorithm::dpg;
  if (name == "mdpg") return Algorithm::mdpg;
  if (name == "mdpgt") return Algorithm::mdpgt;
  throw ConfigError("unknown algorithm '" + name + "' (expected dpg, mdpg or mdpgt)");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dpg: return "dpg";
    case Algorithm::mdpg: return "mdpg";
    case Algorithm::mdpgt: return "mdpgt";
  }
  return "mdpgt";
}

std::vector<PolicyParams> SwarmState::policies() const {
  std::vector<PolicyParams> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.emplace_back(shape, a.x);
  return out;
}

namespace {

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so the
// result does not depend on the thread count.
template <class Fn>
void for_each_agent(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void validate(const TrainConfig& cfg) {
  cfg.env.validate();
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) throw ConfigError("step size eta must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw ConfigError("momentum coefficient beta must lie in (0, 1]");
  if (cfg.batch_init == 0) throw ConfigError("initialization batch must be >= 1");
}

// x_{k+1} = W (x_k + eta d_k)
void gossip_step(SwarmState& s, const std::vector<Vec>& direction, double eta) {
  std::vector<Vec> moved(s.agents.size());
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    moved[i] = s.agents[i].x;
    axpy(eta, direction[i], moved[i]);
  }
  std::vector<Vec> mixed = gossip(s.w, moved);
  for (std::size_t i = 0; i < s.agents.size(); ++i) s.agents[i].x = std::move(mixed[i]);
}

void fill_common(StepReport& r, const SwarmState& s, const std::vector<Vec>& us) {
  r.k = s.k;
  r.mean_reward = 0.0;
  for (double v : r.episode_rewards) r.mean_reward += v;
  r.mean_reward /= static_cast<double>(r.episode_rewards.size());
  std::vector<Vec> xs;
  xs.reserve(s.agents.size());
  for (const auto& a : s.agents) xs.push_back(a.x);
  r.consensus_error = consensus_error(xs);
  r.u_norm = norm(mean_of(us));
}

void fill_tracking(StepReport& r, const SwarmState& s, const std::vector<Vec>& us) {
  std::vector<Vec> vs;
  vs.reserve(s.agents.size());
  for (const auto& a : s.agents) vs.push_back(a.v);
  const Vec vbar = mean_of(vs);
  const Vec ubar = mean_of(us);
  double diff = 0.0;
  for (std::size_t i = 0; i < vbar.size(); ++i) diff += (vbar[i] - ubar[i]) * (vbar[i] - ubar[i]);
  r.tracking_residual = std::sqrt(diff);
  r.tracking_relative = r.tracking_residual / (1.0 + norm(ubar));
}

// v_{k+1} = W v_k + u_k - u_{k-1}
void track(SwarmState& s) {
  std::vector<Vec> vs;
  vs.reserve(s.agents.size());
  for (const auto& a : s.agents) vs.push_back(a.v);
  std::vector<Vec> mixed = gossip(s.w, vs);
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    auto& a = s.agents[i];
    Vec& v = mixed[i];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = v[j] + a.surrogate.u[j] - a.surrogate.u_prev[j];
    a.v = std::move(v);
  }
}

enum class SurrogateRule { vanilla, hybrid };

StepReport advance(SwarmState& s, const TrainConfig& cfg, SurrogateRule rule, bool tracking) {
  validate(cfg);
  if (s.k < 1) throw ConfigError("training steps start at k = 1; initialize the swarm first");
  const std::size_t n = s.agents.size();
  const std::vector<PolicyParams> policies = s.policies();
  const std::vector<Trajectory> trajs = sample_trajectory(cfg.env, policies, {cfg.seed, s.k, 0});

  StepReport r;
  r.episode_rewards.resize(n);
  r.clamps.assign(n, 0);
  for_each_agent(n, cfg.threads, [&](std::size_t i) {
    auto& a = s.agents[i];
    r.episode_rewards[i] = trajs[i].total_reward();
    if (rule == SurrogateRule::vanilla) {
      a.surrogate.u_prev = std::move(a.surrogate.u);
      a.surrogate.u = pg_estimate(trajs[i], policies[i], cfg.estimator);
      a.surrogate.params_prev = a.x;
    } else {
      SurrogateDiagnostics diag;
      a.surrogate = surrogate_update(a.surrogate, trajs[i], policies[i], cfg.beta, cfg.estimator, &diag);
      r.clamps[i] = diag.clamp_events;
    }
  });

  std::vector<Vec> us;
  us.reserve(n);
  for (const auto& a : s.agents) us.push_back(a.surrogate.u);
  fill_common(r, s, us);

  if (tracking) {
    track(s);
    fill_tracking(r, s, us);
    std::vector<Vec> vs;
    vs.reserve(n);
    for (const auto& a : s.agents) vs.push_back(a.v);
    gossip_step(s, vs, cfg.eta);
  } else {
    gossip_step(s, us, cfg.eta);
  }
  ++s.k;
  check_divergence(s);
  return r;
}

}  // namespace

void check_divergence(const SwarmState& s) {
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    if (!all_finite(a.x) || !all_finite(a.surrogate.u) || !all_finite(a.v))
      throw NumericFault("agent " + std::to_string(i) + " has non-finite state at k = " + std::to_string(s.k));
    const double nx = norm(a.x);
    if (nx > 1e6)
      throw NumericFault("agent " + std::to_string(i) + " diverged: ||x|| = " + std::to_string(nx) +
                         " at k = " + std::to_string(s.k));
  }
}

SwarmState init_swarm(Algorithm algo, std::span<const PolicyParams> policies, MixingMatrix w,
                      const TrainConfig& cfg, StepReport* report) {
  validate(cfg);
  const std::size_t n = policies.size();
  if (n == 0) throw ConfigError("swarm needs at least one agent");
  if (w.size() != n)
    throw ConfigError("mixing matrix is " + std::to_string(w.size()) + " x " + std::to_string(w.size()) +
                      " but the swarm has " + std::to_string(n) + " agents");
  if (cfg.env.n_agents != n) throw ConfigError("env agent count differs from the number of policies");
  for (const auto& p : policies)
    if (p.theta != policies.front().theta) throw ConfigError("all agents must start from the same parameters");

  std::vector<std::vector<Trajectory>> batch(cfg.batch_init);
  for (std::size_t m = 0; m < cfg.batch_init; ++m) batch[m] = sample_trajectory(cfg.env, policies, {cfg.seed, 0, m});

  SwarmState s{{}, 0, std::move(w), policies.front().shape};
  s.agents.resize(n);
  StepReport r;
  r.episode_rewards.assign(n, 0.0);
  r.clamps.assign(n, 0);
  for_each_agent(n, cfg.threads, [&](std::size_t i) {
    std::vector<Trajectory> mine;
    mine.reserve(cfg.batch_init);
    double reward = 0.0;
    for (auto& episode : batch) {
      reward += episode[i].total_reward();
      mine.push_back(episode[i]);
    }
    r.episode_rewards[i] = reward / static_cast<double>(cfg.batch_init);
    s.agents[i].x = policies[i].theta;
    s.agents[i].surrogate = init_surrogate(policies[i], mine, cfg.estimator);
  });

  std::vector<Vec> us;
  us.reserve(n);
  for (const auto& a : s.agents) us.push_back(a.surrogate.u);
  fill_common(r, s, us);

  if (algo == Algorithm::mdpgt) {
    for (auto& a : s.agents) a.v.assign(a.x.size(), 0.0);
    track(s);
    fill_tracking(r, s, us);
    std::vector<Vec> vs;
    for (const auto& a : s.agents) vs.push_back(a.v);
    gossip_step(s, vs, cfg.eta);
  } else {
    gossip_step(s, us, cfg.eta);
  }
  s.k = 1;
  check_divergence(s);
  if (report) *report = std::move(r);
  return s;
}

StepReport mdpgt_step(SwarmState& s, const TrainConfig& cfg) {
  return advance(s, cfg, SurrogateRule::hybrid, true);
}

StepReport mdpg_step(SwarmState& s, const TrainConfig& cfg) {
  return advance(s, cfg, SurrogateRule::hybrid, false);
}

StepReport dpg_step(SwarmState& s, const TrainConfig& cfg) {
  return advance(s, cfg, SurrogateRule::vanilla, false);
}

StepReport step(Algorithm algo, SwarmState& s, const TrainConfig& cfg) {
  switch (algo) {
    case Algorithm::dpg: return dpg_step(s, cfg);
    case Algorithm::mdpg: return mdpg_step(s, cfg);
    case Algorithm::mdpgt: return mdpgt_step(s, cfg);
  }
  return mdpgt_step(s, cfg);
}

RunResult run(Algorithm algo, std::span<const PolicyParams> policies, const MixingMatrix& w, const TrainConfig& cfg,
              std::size_t iterations, const std::function<void(const StepReport&)>& on_record) {
  if (iterations < 2) throw ConfigError("a run needs at least K = 2 iterations");
  RunResult out;
  const std::size_t n = policies.size();

  Rng pick = make_stream({cfg.seed, StreamPurpose::output_pick, 0, 0, 0});
  out.output_agent = std::uniform_int_distribution<std::size_t>(0, n - 1)(pick);
  out.output_iteration = std::uniform_int_distribution<std::size_t>(1, iterations)(pick);

  auto emit = [&](StepReport r) {
    if (on_record) on_record(r);
    out.records.push_back(std::move(r));
  };
  auto snapshot = [&](const SwarmState& s) {
    if (s.k == out.output_iteration) out.output_params = s.agents[out.output_agent].x;
  };

  try {
    StepReport r0;
    SwarmState s = init_swarm(algo, policies, w, cfg, &r0);
    emit(std::move(r0));
    snapshot(s);
    while (s.k < iterations) {
      emit(step(algo, s, cfg));
      snapshot(s);
    }
    out.final_state = std::move(s);
  } catch (const NumericFault& e) {
    out.aborted = true;
    out.failure = e.what();
  }
  return out;
}

std::vector<PolicyParams> initial_policies(const PolicyShape& shape, std::size_t n_agents, std::uint64_t seed) {
  Rng rng = make_stream({seed, StreamPurpose::param_init, 0, 0, 0});
  const PolicyParams p = init_params(shape, rng);
  return std::vector<PolicyParams>(n_agents, p);
}

}  // namespace mdpgt
