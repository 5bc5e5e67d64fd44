// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance --properties      criteria 1-8
//   acceptance --reproductions   criteria 9-12
//   acceptance                   all of them

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mdpgt/decentral.hpp"
#include "mdpgt/error.hpp"
#include "mdpgt/gradient.hpp"
#include "mdpgt/harness.hpp"
#include "mdpgt/stats.hpp"
#include "mdpgt/theory.hpp"
#include "mdpgt/topology.hpp"
#include "oracles.hpp"

using namespace mdpgt;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<void(Verdict&)> body;
};

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& xs) {
  return {stats::mean(xs), stats::standard_error(xs)};
}

PolicyShape gaussian_shape(const EnvConfig& env, double xi = 1.0) {
  PolicyShape base;
  base.family = PolicyFamily::linear_gaussian;
  base.gaussian = {xi, 1.0, 1.0};
  return policy_shape_for(env, base);
}

PolicyShape mlp_shape(const EnvConfig& env, std::size_t h1 = 64, std::size_t h2 = 64) {
  PolicyShape base;
  base.family = PolicyFamily::mlp_categorical;
  base.mlp = {h1, h2, 0};
  return policy_shape_for(env, base);
}

EnvConfig lineworld(std::size_t n, std::size_t horizon, double gamma) {
  EnvConfig e;
  e.kind = EnvKind::lineworld;
  e.n_agents = n;
  e.horizon = horizon;
  e.gamma = gamma;
  return e;
}

std::vector<Vec> random_matrix(std::size_t n, std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<Vec> xs(n, Vec(d));
  for (auto& x : xs)
    for (double& v : x) v = normal(rng);
  return xs;
}

// ---------------------------------------------------------------- criterion 1

void mixing_suite(Verdict& v) {
  Rng rng(1);
  std::size_t matrices = 0;
  double worst_ratio = 0.0;
  for (std::size_t n = 1; n <= 16; ++n) {
    std::vector<Graph> graphs{build_graph(TopologyKind::full, n), build_graph(TopologyKind::ring, n)};
    if (n >= 2) graphs.push_back(build_graph(TopologyKind::bipartite, n));
    // Random connected graphs: a random spanning tree plus random extra edges.
    for (int r = 0; r < 5 && n >= 3; ++r) {
      std::vector<Edge> edges;
      for (std::size_t i = 1; i < n; ++i) edges.emplace_back(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
      std::bernoulli_distribution extra(0.2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (extra(rng)) edges.emplace_back(i, j);
      graphs.push_back(build_graph(n, edges));
    }
    for (const auto& g : graphs) {
      const MixingMatrix w = metropolis_weights(g);
      ++matrices;
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          row += w(i, j);
          col += w(j, i);
        }
        v.require(std::abs(row - 1.0) <= 1e-12 && std::abs(col - 1.0) <= 1e-12, "doubly stochastic");
      }
      v.require(w.lambda() < 1.0, "lambda < 1");
      for (int t = 0; t < 100; ++t) {
        const auto xs = random_matrix(n, 3, rng);
        const Vec bar = mean_of(xs);
        const auto mixed = gossip(w, xs);
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t d = 0; d < 3; ++d) {
            before += (xs[i][d] - bar[d]) * (xs[i][d] - bar[d]);
            after += (mixed[i][d] - bar[d]) * (mixed[i][d] - bar[d]);
          }
        before = std::sqrt(before);
        after = std::sqrt(after);
        v.require(after <= w.lambda() * before + 1e-10, "gossip contraction");
        if (before > 0 && w.lambda() > 1e-8) worst_ratio = std::max(worst_ratio, after / (w.lambda() * before));
      }
    }
  }
  v.detail << matrices << " matrices, max ||WX-PX|| / (lambda ||X-PX||) = " << worst_ratio << " (lambda > 1e-8)";
}

// ---------------------------------------------------------------- criterion 2

void tracking_identity(Verdict& v) {
  TrainConfig cfg;
  cfg.env = lineworld(4, 50, 0.99);
  cfg.eta = 1e-4;
  cfg.beta = 0.5;
  cfg.seed = 2;
  const auto pol = initial_policies(mlp_shape(cfg.env), 4, cfg.seed);
  StepReport r0;
  SwarmState s = mdpgt_init(pol, metropolis_weights(build_graph(TopologyKind::ring, 4)), cfg, &r0);
  double worst = r0.tracking_relative;
  for (int k = 1; k < 200; ++k) worst = std::max(worst, mdpgt_step(s, cfg).tracking_relative);
  v.require(worst <= 1e-9, "relative tracking residual <= 1e-9");
  v.detail << "200 iterations, max relative residual " << worst;
}

// ---------------------------------------------------------------- criterion 3

void degeneration(Verdict& v) {
  const std::size_t n = 5, K = 100;
  TrainConfig cfg;
  cfg.env = lineworld(n, 20, 0.95);
  cfg.eta = 1e-4;
  cfg.beta = 1.0;
  cfg.seed = 13;
  const auto shape = mlp_shape(cfg.env, 16, 16);
  const auto pol = initial_policies(shape, n, cfg.seed);
  std::size_t compared = 0;
  for (auto kind : {TopologyKind::full, TopologyKind::ring, TopologyKind::bipartite}) {
    const auto w = metropolis_weights(build_graph(kind, n));
    const RunResult tracked = run(Algorithm::mdpgt, pol, w, cfg, K);
    const auto oracle = oracle::dpg_tracking(cfg, shape, pol[0].theta, w, K);
    const RunResult mdpg = run(Algorithm::mdpg, pol, w, cfg, K);
    const RunResult dpg = run(Algorithm::dpg, pol, w, cfg, K);
    v.require(!tracked.aborted && !mdpg.aborted && !dpg.aborted, "runs complete");
    if (!v.pass) return;
    for (std::size_t i = 0; i < n; ++i) {
      v.require(tracked.final_state->agents[i].x == oracle[i], "MDPGT(beta=1) == tracking oracle");
      v.require(mdpg.final_state->agents[i].x == dpg.final_state->agents[i].x, "MDPG(beta=1) == DPG");
      ++compared;
    }
    for (std::size_t k = 0; k < K; ++k)
      v.require(mdpg.records[k].episode_rewards == dpg.records[k].episode_rewards, "identical reward streams");
  }
  v.detail << K << " iterations, " << compared << " agent parameter vectors compared bitwise per pair";
}

// ---------------------------------------------------------------- criterion 4

double fd_relative_error(const PolicyParams& p, const Vec& obs, double action) {
  const Vec s = score(p, obs, action);
  PolicyParams q = p;
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const double orig = q.theta[i];
    q.theta[i] = orig + 1e-5;
    const double up = log_prob(q, obs, action);
    q.theta[i] = orig - 1e-5;
    const double down = log_prob(q, obs, action);
    q.theta[i] = orig;
    const double fd = (up - down) / 2e-5;
    diff += (fd - s[i]) * (fd - s[i]);
    ref += fd * fd;
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
}

void score_checks(Verdict& v) {
  Rng rng(4);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal;
  double worst_mlp = 0.0, worst_gauss = 0.0;
  const auto mlp = mlp_shape(lineworld(3, 10, 0.9), 16, 12);
  const auto gauss = gaussian_shape(lineworld(3, 10, 0.9), 0.7);
  for (int t = 0; t < 100; ++t) {
    Vec obs(3);
    for (double& o : obs) o = unit(rng);
    const PolicyParams pm = init_params(mlp, rng);
    worst_mlp = std::max(worst_mlp, fd_relative_error(pm, obs, static_cast<double>(t % 3)));
    PolicyParams pg(gauss, Vec(3));
    for (double& x : pg.theta) x = normal(rng);
    worst_gauss = std::max(worst_gauss, fd_relative_error(pg, obs, normal(rng)));
  }
  v.require(worst_mlp <= 1e-4, "MLP finite-difference rel. err <= 1e-4");
  v.require(worst_gauss <= 1e-4, "Gaussian finite-difference rel. err <= 1e-4");

  double worst_z = 0.0;
  auto score_mean = [&](const PolicyParams& p, const Vec& obs) {
    const std::size_t d = p.dimension();
    std::vector<std::vector<double>> comps(d);
    for (int i = 0; i < 100000; ++i) {
      const Vec s = score(p, obs, sample_action(p, obs, rng));
      for (std::size_t j = 0; j < d; ++j) comps[j].push_back(s[j]);
    }
    for (const auto& c : comps) {
      const auto [m, se] = mean_se(c);
      const double z = se > 0 ? std::abs(m) / se : (m == 0 ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
      v.require(std::abs(m) <= 4.0 * se + 1e-15, "E[score] within 4 SE of 0");
    }
  };
  score_mean(PolicyParams(gauss, {0.3, -0.8, 0.5}), Vec{0.2, -0.4, 0.9});
  score_mean(init_params(mlp_shape(lineworld(2, 10, 0.9), 6, 5), rng), Vec{0.5, -0.5});
  v.detail << "max FD rel. err MLP " << worst_mlp << ", Gaussian " << worst_gauss << "; max |mean|/SE " << worst_z;
}

// ---------------------------------------------------------------- criterion 5

void importance_weights(Verdict& v) {
  auto env = lineworld(1, 2, 0.9);
  const auto shape = gaussian_shape(env);
  const PolicyParams sampler(shape, {0.4});
  const PolicyParams other(shape, {-0.1});
  const std::vector<PolicyParams> pol{sampler};
  std::vector<double> ws;
  ws.reserve(100000);
  bool self_one = true;
  for (std::uint64_t m = 0; m < 100000; ++m) {
    const auto t = sample_trajectory(env, pol, {5, m, 0})[0];
    ws.push_back(importance_weight(t, sampler, other).value);
    if (m < 1000) self_one = self_one && importance_weight(t, sampler, sampler).value == 1.0;
  }
  v.require(self_one, "weight(tau, p, p) == 1 exactly");
  const auto [m, se] = mean_se(ws);
  v.require(std::abs(m - 1.0) <= 4.0 * se, "E[weight] within 4 SE of 1");

  // Parameter gaps of norm 5 at xi = 1, H = 5.
  auto env5 = lineworld(3, 5, 0.9);
  const auto shape5 = gaussian_shape(env5, 1.0);
  Rng rng(9);
  std::normal_distribution<double> normal;
  bool finite = true;
  std::size_t clamps = 0;
  for (int t = 0; t < 2000; ++t) {
    Vec a(3), dir(3);
    for (double& x : a) x = normal(rng);
    for (double& x : dir) x = normal(rng);
    const double scale = 5.0 / norm(dir);
    Vec b = a;
    for (std::size_t i = 0; i < 3; ++i) b[i] += scale * dir[i];
    const PolicyParams pa(shape5, a), pb(shape5, b);
    const std::vector<PolicyParams> trio{pa, pa, pa};
    const auto traj = sample_trajectory(env5, trio, {7, static_cast<std::uint64_t>(t), 0})[0];
    const auto w1 = importance_weight(traj, pa, pb);
    const auto w2 = importance_weight(traj, pb, pa);
    finite = finite && std::isfinite(w1.value) && std::isfinite(w2.value) && w1.value >= 0 && w2.value >= 0;
    clamps += w1.clamped + w2.clamped;
  }
  v.require(finite, "finite weights for ||dtheta|| = 5");
  v.detail << "E[weight] = " << m << " +- " << se << "; 4000 weights at ||dtheta||=5 finite, " << clamps
           << " clamped";
}

// ---------------------------------------------------------------- criterion 6

void unbiasedness(Verdict& v) {
  auto env = lineworld(1, 2, 0.9);
  const auto shape = gaussian_shape(env);
  const double theta = 0.3, h = 1e-3;
  const PolicyParams p(shape, {theta}), up(shape, {theta + h}), down(shape, {theta - h});
  std::vector<double> pg, fd;
  pg.reserve(100000);
  fd.reserve(100000);
  for (std::uint64_t m = 0; m < 100000; ++m) {
    const EpisodeKey key{6, m, 0};
    const auto t = sample_trajectory(env, std::vector<PolicyParams>{p}, key)[0];
    pg.push_back(pg_estimate(t, p, Estimator::pgt)[0]);
    const double j_up = sample_trajectory(env, std::vector<PolicyParams>{up}, key)[0].discounted_return();
    const double j_down = sample_trajectory(env, std::vector<PolicyParams>{down}, key)[0].discounted_return();
    fd.push_back((j_up - j_down) / (2.0 * h));
  }
  const auto a = mean_se(pg), b = mean_se(fd);
  const double combined = std::sqrt(a.se * a.se + b.se * b.se);
  v.require(std::abs(a.mean - b.mean) <= 3.0 * combined, "means within 3 combined SE");
  v.detail << "PGT " << a.mean << " +- " << a.se << ", finite difference " << b.mean << " +- " << b.se
           << ", |diff| / SE = " << std::abs(a.mean - b.mean) / combined;
}

// ---------------------------------------------------------------- criterion 7

void variance_reduction(Verdict& v) {
  TrainConfig cfg;
  cfg.env = lineworld(1, 20, 0.99);
  cfg.eta = 1e-3;
  cfg.beta = 0.5;
  const auto shape = gaussian_shape(cfg.env);
  const MixingMatrix w = metropolis_weights(build_graph(TopologyKind::full, 1));
  std::vector<double> hybrid, vanilla;
  for (std::uint64_t replica = 0; replica < 50; ++replica) {
    cfg.seed = 1000 + replica;
    const std::vector<PolicyParams> pol{PolicyParams(shape, {0.0})};
    SwarmState s = mdpgt_init(pol, w, cfg);
    while (s.k < 200) mdpgt_step(s, cfg);
    // Iterate k = 200: the hybrid surrogate and the plain estimate on the same episode.
    const PolicyParams x200(shape, s.agents[0].x);
    const auto t = sample_trajectory(cfg.env, std::vector<PolicyParams>{x200}, {cfg.seed, 200, 0})[0];
    mdpgt_step(s, cfg);
    hybrid.push_back(s.agents[0].surrogate.u[0]);
    vanilla.push_back(pg_estimate(t, x200)[0]);
  }
  const auto f = stats::f_test_greater(vanilla, hybrid);
  v.require(f.p_value < 0.05, "one-sided F-test at 0.05");
  v.detail << "Var(beta=1) = " << stats::variance(vanilla) << ", Var(beta=0.5) = " << stats::variance(hybrid)
           << ", F = " << f.statistic << ", p = " << f.p_value;
}

// ---------------------------------------------------------------- criterion 8

void theory_constants(Verdict& v) {
  ProblemConstants pc;
  pc.c_g = 1.0;
  pc.c_h = 1.0;
  pc.reward_bound = 1.0;
  pc.gamma = 0.5;
  pc.horizon = 2;
  pc.is_variance = 0.0;
  const auto dc = derive_constants(pc);
  v.require(dc.smoothness == 4.0, "L = 4");
  v.require(dc.gradient_bound == 4.0 && dc.sigma_bar_sq == 16.0, "G = 4, sigma^2 = 16");
  v.require(dc.c_upsilon == 10.0, "C_upsilon = 10");

  DerivedConstants third{};
  third.smoothness = std::sqrt(1.0 / 432.0);
  third.gradient_bound = std::sqrt(1.0 / 432.0);
  third.c_upsilon = 1.0;
  v.require(std::abs(theorem1_eta_max(third, 0.0, 1).value - 1.0) <= 1e-14, "theorem 1 third term = 1");

  DerivedConstants d96{};
  d96.d = 96.0;
  const auto beta = beta_from_eta(d96, 1.0, 96);
  v.require(beta.beta == 1.0 && beta.out_of_range, "beta boundary flagged");

  DerivedConstants eighth{};
  eighth.smoothness = 0.125;
  eighth.d = 1.0;
  v.require(corollary1_schedule(eighth, 1, 1, 0.5).eta == 1.0, "corollary 1 eta = 1");
  v.require(corollary2_schedule(eighth, 1, 1, 0.5).eta == 1.0, "corollary 2 eta = 1");
  v.require(corollary1_schedule(eighth, 27, 27, 0.5).batch == 1, "N = K gives batch 1");
  const double floor0 = steady_state_error(dc, 0.1, 0.0, 4);
  v.require(floor0 == 8.0 * 0.1 * 16.0 / 4.0, "steady-state error at lambda = 0");
  v.require(steady_state_error(dc, 0.0, 0.5, 4) == 0.0, "steady-state error at beta = 0");

  const LinearGaussianSpec spec{1.0, 1.0, 1.0};
  const auto gc = gaussian_constants(spec, 1.0, 1.0, 0.5, 1, 1.0);
  v.require(gc.problem.c_h == 1.0, "Gaussian C_h = 1");
  v.require(gaussian_variance_bound(spec, 2.0, 0.0, 1) == 4.0, "bound at gamma = 0, H = 1");

  // Empirical variance of the causal estimator against the bound.
  auto env = lineworld(1, 5, 0.9);
  const auto shape = gaussian_shape(env);
  const PolicyParams p(shape, {0.5});
  const std::vector<PolicyParams> pol{p};
  std::vector<double> g;
  g.reserve(100000);
  for (std::uint64_t m = 0; m < 100000; ++m) g.push_back(pg_estimate(sample_trajectory(env, pol, {8, m, 0})[0], p)[0]);
  const double empirical = stats::variance(g);
  const double r = env.reward_bound();
  const double bound = gaussian_variance_bound(spec, r, env.gamma, env.horizon);
  const double printed = r * r / ((1 - env.gamma) * (1 - env.gamma)) * gaussian_variance_bracket_minus(env.gamma, env.horizon);
  v.require(empirical <= bound, "variance bound dominates the empirical variance");
  v.detail << "empirical Var(g) = " << empirical << " <= bound " << bound << " (R = " << r
           << "); subtracted-bracket form evaluates to " << printed;
}

// ------------------------------------------------------------ reproductions

constexpr std::size_t kSeeds = 5;
constexpr double kEta = 2e-5;

struct Task {
  Algorithm algo = Algorithm::mdpgt;
  TopologyKind topology = TopologyKind::full;
  double beta = 0.5;
  std::size_t batch_init = 1;

  auto key() const { return std::tuple(static_cast<int>(algo), static_cast<int>(topology), beta, batch_init); }
};

class Runs {
 public:
  // Per-iteration swarm-mean episode reward.
  const std::vector<double>& curve(const Task& t, std::uint64_t seed) {
    const auto k = std::tuple_cat(t.key(), std::tuple(seed));
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;

    KeyValues kv{{"algo", to_string(t.algo)}, {"env", "lineworld"},     {"agents", "5"},
                 {"horizon", "100"},          {"gamma", "0.99"},        {"episodes", "2000"},
                 {"topology", to_string(t.topology)},
                 {"beta", format_double(t.beta)}, {"batch-init", std::to_string(t.batch_init)},
                 {"eta", format_double(kEta)}, {"seed", std::to_string(seed)}};
    const RunConfig cfg = resolve_config(kv);
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = run(cfg.algo, initial_policies(cfg.policy, cfg.env.n_agents, seed), cfg.mixing(),
                            cfg.train(seed), cfg.episodes);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<double> c;
    for (const auto& rec : r.records) c.push_back(rec.mean_reward);
    std::fprintf(stderr, "  run %s topology=%s beta=%g batch=%zu seed=%llu: %s, final-500 %.3f (%.1fs)\n",
                 to_string(t.algo).c_str(), to_string(t.topology).c_str(), t.beta, t.batch_init,
                 static_cast<unsigned long long>(seed), r.aborted ? r.failure.c_str() : "ok",
                 c.empty() ? NAN : stats::tail_mean(c, 500), secs);
    return cache_.emplace(k, std::move(c)).first->second;
  }

  std::vector<double> finals(const Task& t) {
    std::vector<double> out;
    for (std::uint64_t s = 0; s < kSeeds; ++s) {
      const auto& c = curve(t, s);
      out.push_back(c.size() == 2000 ? stats::tail_mean(c, 500) : NAN);
    }
    return out;
  }

 private:
  std::map<std::tuple<int, int, double, std::size_t, std::uint64_t>, std::vector<double>> cache_;
};

Runs& runs() {
  static Runs r;
  return r;
}

std::string join(const std::vector<double>& xs) {
  std::ostringstream s;
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << format_double(std::round(xs[i] * 100) / 100);
  return s.str();
}

void lineworld_ordering(Verdict& v) {
  const auto mdpgt = runs().finals({Algorithm::mdpgt});
  const auto dpg = runs().finals({Algorithm::dpg});
  int wins = 0;
  for (std::size_t s = 0; s < kSeeds; ++s) wins += mdpgt[s] > dpg[s];
  const auto t = stats::paired_t_test(mdpgt, dpg, true);
  v.require(wins >= 4, "MDPGT ahead in >= 4 of 5 seeds");
  v.require(t.p_value < 0.05, "one-sided paired t-test p < 0.05");
  v.detail << "final-500 MDPGT [" << join(mdpgt) << "] vs DPG [" << join(dpg) << "], wins " << wins
           << "/5, t = " << t.statistic << ", p = " << t.p_value;
}

void beta_ablation(Verdict& v) {
  int closer = 0;
  std::ostringstream per_seed;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    const auto dpg = stats::smooth(runs().curve({Algorithm::dpg}, s), 100);
    const auto b5 = stats::smooth(runs().curve({Algorithm::mdpgt, TopologyKind::full, 0.5}, s), 100);
    const auto b9 = stats::smooth(runs().curve({Algorithm::mdpgt, TopologyKind::full, 0.9}, s), 100);
    const auto b2 = stats::smooth(runs().curve({Algorithm::mdpgt, TopologyKind::full, 0.2}, s), 100);
    const double d5 = stats::l2_distance(b5, dpg), d9 = stats::l2_distance(b9, dpg), d2 = stats::l2_distance(b2, dpg);
    closer += d9 < d5;
    per_seed << " seed " << s << ": d(0.2)=" << std::round(d2) << " d(0.5)=" << std::round(d5)
             << " d(0.9)=" << std::round(d9) << ";";
  }
  v.require(closer >= 4, "beta=0.9 closer to DPG than beta=0.5 in >= 4 of 5 seeds");
  v.detail << closer << "/5 seeds;" << per_seed.str();
  const auto f2 = runs().finals({Algorithm::mdpgt, TopologyKind::full, 0.2});
  const auto f9 = runs().finals({Algorithm::mdpgt, TopologyKind::full, 0.9});
  v.detail << " pooled final-500: beta=0.2 " << stats::mean(f2) << ", beta=0.5 "
           << stats::mean(runs().finals({Algorithm::mdpgt})) << ", beta=0.9 " << stats::mean(f9);
}

void topology_insensitivity(Verdict& v) {
  const double full = stats::mean(runs().finals({Algorithm::mdpgt, TopologyKind::full}));
  double worst = 0.0;
  v.detail << "pooled final-500: full " << full;
  for (auto kind : {TopologyKind::ring, TopologyKind::bipartite}) {
    const double m = stats::mean(runs().finals({Algorithm::mdpgt, kind}));
    worst = std::max(worst, std::abs(m - full) / std::abs(full));
    v.detail << ", " << to_string(kind) << " " << m;
  }
  v.require(worst <= 0.15, "every topology within 15% of the full-topology value");
  v.detail << "; max relative deviation " << worst;
}

void batch_initialization(Verdict& v) {
  std::vector<double> early1, early4, late1, late4;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    const auto& c1 = runs().curve({Algorithm::mdpgt, TopologyKind::full, 0.5, 1}, s);
    const auto& c4 = runs().curve({Algorithm::mdpgt, TopologyKind::full, 0.5, 4}, s);
    early1.push_back(std::accumulate(c1.begin(), c1.begin() + 200, 0.0) / 200.0);
    early4.push_back(std::accumulate(c4.begin(), c4.begin() + 200, 0.0) / 200.0);
    late1.push_back(stats::tail_mean(c1, 500));
    late4.push_back(stats::tail_mean(c4, 500));
  }
  const auto t = stats::paired_t_test(early4, early1, false);
  v.require(t.p_value > 0.05, "first-10% curves indistinguishable (paired test p > 0.05)");
  v.detail << "first 200 iterations: batch 1 [" << join(early1) << "], batch 4 [" << join(early4)
           << "], p = " << t.p_value << "; final-500 (logged only): batch 1 " << stats::mean(late1) << ", batch 4 "
           << stats::mean(late4);
}

}  // namespace

int main(int argc, char** argv) {
  bool properties = argc == 1, reproductions = argc == 1;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--properties") {
      properties = true;
    } else if (a == "--reproductions") {
      reproductions = true;
    } else {
      std::fprintf(stderr, "usage: acceptance [--properties] [--reproductions]\n");
      return 2;
    }
  }

  std::vector<Criterion> all{
      {1, "mixing-matrix suite", 5, mixing_suite},
      {2, "tracking identity", 30, tracking_identity},
      {3, "degeneration equalities", 30, degeneration},
      {4, "score and gradient checks", 60, score_checks},
      {5, "importance-weight suite", 60, importance_weights},
      {6, "estimator unbiasedness", 120, unbiasedness},
      {7, "variance reduction", 300, variance_reduction},
      {8, "theory constants", 120, theory_constants},
      {9, "lineworld ordering MDPGT > DPG", 900, lineworld_ordering},
      {10, "beta-ablation shape", 2700, beta_ablation},
      {11, "topology insensitivity", 2700, topology_insensitivity},
      {12, "mini-batch initialization, early phase", 1800, batch_initialization},
  };

  int failures = 0;
  for (auto& c : all) {
    if ((c.id <= 8 && !properties) || (c.id > 8 && !reproductions)) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) v.detail << " [over runtime budget " << c.budget_seconds << "s]";
    std::printf("%s criterion %2d  %-40s %7.1fs  %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                v.detail.str().c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
