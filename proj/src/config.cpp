#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <CLI11.hpp>

#include "mdpgt/error.hpp"
#include "mdpgt/harness.hpp"

namespace mdpgt {

ScheduleKind parse_schedule(const std::string& name) {
  if (name == "manual") return ScheduleKind::manual;
  if (name == "corollary1") return ScheduleKind::corollary1;
  if (name == "corollary2") return ScheduleKind::corollary2;
  throw ConfigError("invalid value for 'schedule': " + name + " (expected manual, corollary1 or corollary2)");
}

std::string to_string(ScheduleKind s) {
  switch (s) {
    case ScheduleKind::manual: return "manual";
    case ScheduleKind::corollary1: return "corollary1";
    case ScheduleKind::corollary2: return "corollary2";
  }
  return "manual";
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"algo", "dpg | mdpg | mdpgt (required)"},
      {"env", "lineworld | gridworld"},
      {"agents", "number of agents N"},
      {"horizon", "episode length H"},
      {"gamma", "discount factor in [0, 1)"},
      {"world-size", "lineworld half-width or gridworld side"},
      {"collision-penalty", "reward subtracted from a colliding agent"},
      {"topology", "full | ring | bipartite | [[i,j],...]"},
      {"policy", "mlp_categorical | linear_gaussian"},
      {"hidden", "MLP hidden widths, e.g. 64,64"},
      {"xi", "Gaussian policy std-dev"},
      {"action-clip", "Gaussian action bound C_a"},
      {"feature-clip", "Gaussian feature-norm bound C_f"},
      {"eta", "step size"},
      {"beta", "momentum coefficient in (0, 1]"},
      {"batch-init", "trajectories in the initialization mini-batch"},
      {"episodes", "iterations K (one trajectory per agent each)"},
      {"estimator", "pgt | reinforce"},
      {"seed", "root seed"},
      {"seeds", "comma-separated seed list (overrides seed)"},
      {"out", "output directory"},
      {"schedule", "manual | corollary1 | corollary2"},
      {"x-max", "parameter-norm bound for the Gaussian C_g"},
      {"is-variance", "importance-weight variance bound M"},
      {"score-bound-g", "C_g for the MLP family"},
      {"score-bound-h", "C_h for the MLP family"},
      {"threads", "worker threads for per-agent work"},
      {"jobs", "sweep points run concurrently"},
      {"final-window", "iterations averaged for the final reward"},
  };
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("invalid value for '" + key + "': " + value + " (" + why + ")");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "not a finite number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "not a nonnegative integer");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class Parse>
auto parse_enum(const std::string& key, const std::string& v, Parse parse) {
  try {
    return parse(v);
  } catch (const ConfigError& e) {
    bad_value(key, v, e.what());
  }
}

std::string join(const std::vector<std::uint64_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string edges_text(const std::vector<Edge>& edges) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [a, b] : edges) j.push_back({a, b});
  return j.dump();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

KeyValues parse_kv_text(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not 'key = value': " + t);
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str());
}

KeyValues parse_flags(const std::vector<std::string>& args) {
  CLI::App app{"run configuration"};
  app.set_help_flag();
  std::string config_file;
  app.add_option("--config", config_file, "flat key-value config file")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::map<std::string, std::string> given;
  for (const auto& [key, help] : config_keys())
    app.add_option("--" + key, given[key], help)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ExtrasError& e) {
    throw ConfigError(std::string("unknown key: ") + e.what());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("bad command line: ") + e.what());
  }

  KeyValues kv = config_file.empty() ? KeyValues{} : read_kv_file(config_file);
  for (const auto& [key, help] : config_keys())
    if (app.get_option("--" + key)->count() > 0) kv[key] = given[key];
  return kv;
}

RunConfig resolve_config(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    const auto& keys = config_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; }))
      throw ConfigError("unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  RunConfig c;
  const auto algo = get("algo");
  if (!algo) throw ConfigError("missing required key 'algo'");
  c.algo = parse_enum("algo", *algo, parse_algorithm);

  if (auto v = get("env")) c.env.kind = parse_enum("env", *v, parse_env_kind);
  c.env.world_size = c.env.kind == EnvKind::lineworld ? 5 : 10;
  if (auto v = get("agents")) {
    c.env.n_agents = to_uint("agents", *v);
    if (c.env.n_agents == 0) bad_value("agents", *v, "must be >= 1");
  }
  if (auto v = get("horizon")) {
    c.env.horizon = to_uint("horizon", *v);
    if (c.env.horizon == 0) bad_value("horizon", *v, "must be >= 1");
  }
  if (auto v = get("gamma")) {
    c.env.gamma = to_double("gamma", *v);
    if (!(c.env.gamma >= 0.0 && c.env.gamma < 1.0)) bad_value("gamma", *v, "must lie in [0, 1)");
  }
  if (auto v = get("world-size")) {
    const auto ws = to_uint("world-size", *v);
    if (ws < 1 || ws > 100000) bad_value("world-size", *v, "must lie in [1, 100000]");
    c.env.world_size = static_cast<int>(ws);
  }
  if (auto v = get("collision-penalty")) {
    c.env.collision_penalty = to_double("collision-penalty", *v);
    if (c.env.collision_penalty < 0.0) bad_value("collision-penalty", *v, "must be >= 0");
  }
  try {
    c.env.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid environment: ") + e.what());
  }
  if (c.env.cell_count() < c.env.n_agents)
    throw ConfigError("invalid value for 'agents': " + std::to_string(c.env.n_agents) + " agents do not fit on " +
                      std::to_string(c.env.cell_count()) + " cells");

  if (auto v = get("topology")) {
    if (!v->empty() && v->front() == '[') {
      c.topology = TopologyKind::custom;
      try {
        const auto j = nlohmann::json::parse(*v);
        for (const auto& e : j) c.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
      } catch (const nlohmann::json::exception&) {
        bad_value("topology", *v, "edge list must look like [[0,1],[1,2]]");
      }
    } else {
      c.topology = parse_enum("topology", *v, parse_topology_kind);
      if (c.topology == TopologyKind::custom) bad_value("topology", *v, "give an explicit edge list");
    }
  }
  try {
    (void)c.graph();
  } catch (const ConfigError& e) {
    bad_value("topology", get("topology").value_or("full"), e.what());
  }

  if (auto v = get("policy")) c.policy.family = parse_enum("policy", *v, parse_policy_family);
  if (auto v = get("hidden")) {
    const auto parts = split_list(*v);
    if (parts.empty() || parts.size() > 2) bad_value("hidden", *v, "one or two widths");
    c.policy.mlp.hidden1 = to_uint("hidden", parts.front());
    c.policy.mlp.hidden2 = to_uint("hidden", parts.back());
    if (c.policy.mlp.hidden1 == 0 || c.policy.mlp.hidden2 == 0) bad_value("hidden", *v, "widths must be >= 1");
  }
  auto positive = [&](const std::string& key, double& field) {
    if (auto v = get(key)) {
      field = to_double(key, *v);
      if (!(field > 0.0)) bad_value(key, *v, "must be > 0");
    }
  };
  positive("xi", c.policy.gaussian.xi);
  positive("action-clip", c.policy.gaussian.action_clip);
  positive("feature-clip", c.policy.gaussian.feature_clip);
  if (c.policy.family == PolicyFamily::linear_gaussian && c.env.kind != EnvKind::lineworld)
    throw ConfigError("invalid value for 'policy': linear_gaussian drives lineworld only");
  c.policy = policy_shape_for(c.env, c.policy);

  positive("eta", c.eta);
  if (auto v = get("beta")) {
    c.beta = to_double("beta", *v);
    if (!(c.beta > 0.0 && c.beta <= 1.0)) bad_value("beta", *v, "must lie in (0, 1]");
  }
  if (auto v = get("batch-init")) {
    c.batch_init = to_uint("batch-init", *v);
    if (c.batch_init == 0) bad_value("batch-init", *v, "must be >= 1");
  }
  if (auto v = get("episodes")) {
    c.episodes = to_uint("episodes", *v);
    if (c.episodes < 2) bad_value("episodes", *v, "must be >= 2");
  }
  if (auto v = get("estimator")) c.estimator = parse_enum("estimator", *v, parse_estimator);
  if (auto v = get("seed")) c.seeds = {to_uint("seed", *v)};
  if (auto v = get("seeds")) {
    c.seeds.clear();
    for (const auto& s : split_list(*v)) c.seeds.push_back(to_uint("seeds", s));
    if (c.seeds.empty()) bad_value("seeds", *v, "at least one seed");
  }
  if (auto v = get("out")) c.out = *v;
  positive("x-max", c.x_max);
  if (auto v = get("is-variance")) {
    c.is_variance = to_double("is-variance", *v);
    if (!(c.is_variance >= 0.0)) bad_value("is-variance", *v, "must be >= 0");
  }
  positive("score-bound-g", c.score_bound_g);
  positive("score-bound-h", c.score_bound_h);
  if (auto v = get("threads")) {
    c.threads = to_uint("threads", *v);
    if (c.threads == 0) bad_value("threads", *v, "must be >= 1");
  }
  if (auto v = get("jobs")) {
    c.jobs = to_uint("jobs", *v);
    if (c.jobs == 0) bad_value("jobs", *v, "must be >= 1");
  }
  if (auto v = get("final-window")) {
    c.final_window = to_uint("final-window", *v);
    if (c.final_window == 0) bad_value("final-window", *v, "must be >= 1");
  }

  if (auto v = get("schedule")) c.schedule = parse_enum("schedule", *v, parse_schedule);
  if (c.schedule != ScheduleKind::manual) {
    const ProblemConstants pc = problem_constants(c);
    const DerivedConstants dc = derive_constants(pc);
    const Schedule s = c.schedule == ScheduleKind::corollary1
                           ? corollary1_schedule(dc, pc.n_agents, c.episodes, pc.lambda)
                           : corollary2_schedule(dc, pc.n_agents, c.episodes, pc.lambda);
    if (s.beta_out_of_range)
      throw ConfigError("invalid value for 'schedule': " + to_string(c.schedule) + " gives beta = " +
                        format_double(s.beta) + " >= 1 for K = " + std::to_string(c.episodes));
    c.eta = s.eta;
    c.beta = s.beta;
    c.batch_init = s.batch;
  }
  return c;
}

RunConfig parse_config(const std::vector<std::string>& args) { return resolve_config(parse_flags(args)); }

Graph RunConfig::graph() const {
  if (topology == TopologyKind::custom) return build_graph(env.n_agents, edges);
  return build_graph(topology, env.n_agents);
}

MixingMatrix RunConfig::mixing() const { return metropolis_weights(graph()); }

TrainConfig RunConfig::train(std::uint64_t seed) const {
  TrainConfig t;
  t.env = env;
  t.eta = eta;
  t.beta = beta;
  t.batch_init = batch_init;
  t.estimator = estimator;
  t.seed = seed;
  t.threads = threads;
  return t;
}

KeyValues to_key_values(const RunConfig& c) {
  KeyValues kv;
  kv["algo"] = to_string(c.algo);
  kv["env"] = to_string(c.env.kind);
  kv["agents"] = std::to_string(c.env.n_agents);
  kv["horizon"] = std::to_string(c.env.horizon);
  kv["gamma"] = format_double(c.env.gamma);
  kv["world-size"] = std::to_string(c.env.world_size);
  kv["collision-penalty"] = format_double(c.env.collision_penalty);
  kv["topology"] = c.topology == TopologyKind::custom ? edges_text(c.edges) : to_string(c.topology);
  kv["policy"] = to_string(c.policy.family);
  kv["hidden"] = std::to_string(c.policy.mlp.hidden1) + "," + std::to_string(c.policy.mlp.hidden2);
  kv["xi"] = format_double(c.policy.gaussian.xi);
  kv["action-clip"] = format_double(c.policy.gaussian.action_clip);
  kv["feature-clip"] = format_double(c.policy.gaussian.feature_clip);
  kv["eta"] = format_double(c.eta);
  kv["beta"] = format_double(c.beta);
  kv["batch-init"] = std::to_string(c.batch_init);
  kv["episodes"] = std::to_string(c.episodes);
  kv["estimator"] = to_string(c.estimator);
  kv["seeds"] = join(c.seeds);
  if (!c.out.empty()) kv["out"] = c.out;
  kv["schedule"] = to_string(c.schedule);
  kv["x-max"] = format_double(c.x_max);
  kv["is-variance"] = format_double(c.is_variance);
  kv["score-bound-g"] = format_double(c.score_bound_g);
  kv["score-bound-h"] = format_double(c.score_bound_h);
  kv["threads"] = std::to_string(c.threads);
  kv["jobs"] = std::to_string(c.jobs);
  kv["final-window"] = std::to_string(c.final_window);
  return kv;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["algo"] = to_string(c.algo);
  j["env"] = to_string(c.env.kind);
  j["agents"] = c.env.n_agents;
  j["horizon"] = c.env.horizon;
  j["gamma"] = c.env.gamma;
  j["world-size"] = c.env.world_size;
  j["collision-penalty"] = c.env.collision_penalty;
  if (c.topology == TopologyKind::custom) {
    j["topology"] = nlohmann::json::array();
    for (const auto& [a, b] : c.edges) j["topology"].push_back({a, b});
  } else {
    j["topology"] = to_string(c.topology);
  }
  j["policy"] = to_string(c.policy.family);
  j["hidden"] = {c.policy.mlp.hidden1, c.policy.mlp.hidden2};
  j["xi"] = c.policy.gaussian.xi;
  j["action-clip"] = c.policy.gaussian.action_clip;
  j["feature-clip"] = c.policy.gaussian.feature_clip;
  j["eta"] = c.eta;
  j["beta"] = c.beta;
  j["batch-init"] = c.batch_init;
  j["episodes"] = c.episodes;
  j["estimator"] = to_string(c.estimator);
  j["seeds"] = c.seeds;
  j["out"] = c.out;
  j["schedule"] = to_string(c.schedule);
  j["x-max"] = c.x_max;
  j["is-variance"] = c.is_variance;
  j["score-bound-g"] = c.score_bound_g;
  j["score-bound-h"] = c.score_bound_h;
  j["threads"] = c.threads;
  j["jobs"] = c.jobs;
  j["final-window"] = c.final_window;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  KeyValues kv;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      if (!value.get<std::string>().empty()) kv[key] = value.get<std::string>();
    } else if (value.is_number_float()) {
      kv[key] = format_double(value.get<double>());
    } else if (value.is_number_integer()) {
      kv[key] = value.dump();
    } else if (key == "hidden") {
      kv[key] = std::to_string(value.at(0).get<std::size_t>()) + "," + std::to_string(value.at(1).get<std::size_t>());
    } else if (key == "seeds") {
      kv[key] = join(value.get<std::vector<std::uint64_t>>());
    } else if (key == "topology") {
      kv[key] = value.dump();
    } else {
      throw ConfigError("invalid value for '" + key + "' in JSON config: " + value.dump());
    }
  }
  return resolve_config(kv);
}

ProblemConstants problem_constants(const RunConfig& c) {
  const double lambda = c.mixing().lambda();
  const double r = c.env.reward_bound();
  if (c.policy.family == PolicyFamily::linear_gaussian)
    return gaussian_constants(c.policy.gaussian, c.x_max, r, c.env.gamma, c.env.horizon, c.is_variance,
                              c.env.n_agents, lambda)
        .problem;
  ProblemConstants pc{c.score_bound_g, c.score_bound_h, r, c.env.gamma, c.env.horizon, c.is_variance,
                      c.env.n_agents, lambda};
  pc.validate();
  return pc;
}

namespace {

nlohmann::json schedule_json(const Schedule& s) {
  return {{"eta", s.eta},
          {"beta", s.beta},
          {"batch", s.batch},
          {"k_threshold", s.k_threshold},
          {"below_threshold", s.below_threshold},
          {"threshold_lambda_term_dropped", s.threshold_degenerate},
          {"beta_out_of_range", s.beta_out_of_range}};
}

}  // namespace

nlohmann::json theory_report(const RunConfig& c) {
  const ProblemConstants pc = problem_constants(c);
  const DerivedConstants dc = derive_constants(pc);
  const EtaBound eb = theorem1_eta_max(dc, pc.lambda, pc.n_agents);
  const BetaChoice bc = beta_from_eta(dc, c.eta, pc.n_agents);
  nlohmann::json j;
  j["problem"] = {{"C_g", pc.c_g},           {"C_h", pc.c_h},         {"R", pc.reward_bound},
                  {"gamma", pc.gamma},       {"H", pc.horizon},       {"M", pc.is_variance},
                  {"N", pc.n_agents},        {"lambda", pc.lambda}};
  j["problem"]["score_bounds_source"] =
      c.policy.family == PolicyFamily::linear_gaussian ? "linear_gaussian closed form" : "user supplied";
  j["derived"] = {{"L", dc.smoothness},
                  {"G", dc.gradient_bound},
                  {"sigma_bar_sq", dc.sigma_bar_sq},
                  {"C_upsilon", dc.c_upsilon},
                  {"D", dc.d}};
  j["theorem1_eta_max"] = {{"value", eb.value},
                           {"terms", {eb.terms[0], eb.terms[1], eb.terms[2]}},
                           {"lambda_zero_dropped", eb.lambda_zero_dropped}};
  j["configured"] = {{"eta", c.eta},
                     {"beta", c.beta},
                     {"batch", c.batch_init},
                     {"K", c.episodes},
                     {"eta_within_theorem1", c.eta <= eb.value},
                     {"beta_from_eta", bc.beta},
                     {"beta_from_eta_out_of_range", bc.out_of_range},
                     {"steady_state_error", steady_state_error(dc, c.beta, pc.lambda, pc.n_agents)}};
  j["corollary1"] = schedule_json(corollary1_schedule(dc, pc.n_agents, c.episodes, pc.lambda));
  j["corollary2"] = schedule_json(corollary2_schedule(dc, pc.n_agents, c.episodes, pc.lambda));
  if (c.policy.family == PolicyFamily::linear_gaussian) {
    const auto gc = gaussian_constants(c.policy.gaussian, c.x_max, pc.reward_bound, pc.gamma, pc.horizon,
                                       pc.is_variance, pc.n_agents, pc.lambda);
    j["gaussian_variance_bound"] = {{"bound", gc.variance_bound},
                                    {"bracket", gc.variance_bracket},
                                    {"bracket_with_subtracted_tail", gc.variance_bracket_minus}};
  }
  return j;
}

}  // namespace mdpgt
