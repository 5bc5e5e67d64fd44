#include <cmath>

#include "mdpgt/error.hpp"
#include "mdpgt/harness.hpp"
#include "mdpgt/stats.hpp"

namespace mdpgt {

RecordWriter::RecordWriter(const std::filesystem::path& dir) : csv_path_(dir / "records.csv") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  out_.open(csv_path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot write " + csv_path_.string());
  out_ << kCsvHeader << '\n';
}

void RecordWriter::write(const StepReport& r) {
  const std::string shared = format_double(r.mean_reward) + ',' + format_double(r.consensus_error) + ',' +
                             format_double(r.tracking_residual) + ',' + format_double(r.u_norm) + ',';
  for (std::size_t i = 0; i < r.episode_rewards.size(); ++i) {
    out_ << r.k << ',' << i << ',' << format_double(r.episode_rewards[i]) << ',' << shared
         << (i < r.clamps.size() ? r.clamps[i] : 0) << '\n';
  }
  if (!out_) throw IoError("write to " + csv_path_.string() + " failed");
}

void RecordWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write to " + csv_path_.string() + " failed");
  out_.close();
}

void emit_records(const std::vector<StepReport>& records, const std::filesystem::path& dir) {
  RecordWriter w(dir);
  for (const auto& r : records) w.write(r);
  w.close();
}

nlohmann::json shape_to_json(const PolicyShape& shape) {
  nlohmann::json j{{"family", to_string(shape.family)}, {"obs_dim", shape.obs_dim}, {"dimension", shape.dimension()}};
  if (shape.family == PolicyFamily::linear_gaussian)
    j["gaussian"] = {{"xi", shape.gaussian.xi},
                     {"feature_clip", shape.gaussian.feature_clip},
                     {"action_clip", shape.gaussian.action_clip}};
  else
    j["mlp"] = {{"hidden", {shape.mlp.hidden1, shape.mlp.hidden2}}, {"n_actions", shape.mlp.n_actions}};
  return j;
}

PolicyShape shape_from_json(const nlohmann::json& j) {
  try {
    PolicyShape s;
    s.family = parse_policy_family(j.at("family").get<std::string>());
    s.obs_dim = j.at("obs_dim").get<std::size_t>();
    if (s.family == PolicyFamily::linear_gaussian) {
      const auto& g = j.at("gaussian");
      s.gaussian = {g.at("xi").get<double>(), g.at("feature_clip").get<double>(), g.at("action_clip").get<double>()};
    } else {
      const auto& m = j.at("mlp");
      s.mlp = {m.at("hidden").at(0).get<std::size_t>(), m.at("hidden").at(1).get<std::size_t>(),
               m.at("n_actions").get<std::size_t>()};
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed policy shape: ") + e.what());
  }
}

void write_checkpoint(const RunResult& result, const std::filesystem::path& path) {
  if (!result.final_state) throw ConfigError("checkpoint needs a completed run");
  const SwarmState& s = *result.final_state;
  nlohmann::json j;
  j["shape"] = shape_to_json(s.shape);
  j["k"] = s.k;
  j["final"] = nlohmann::json::array();
  for (const auto& a : s.agents) j["final"].push_back(a.x);
  j["output_iterate"] = {{"agent", result.output_agent}, {"k", result.output_iteration}, {"theta", result.output_params}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump() << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  Checkpoint c;
  const PolicyShape shape = shape_from_json(j.at("shape"));
  try {
    for (const auto& x : j.at("final")) c.final_params.emplace_back(shape, x.get<Vec>());
    c.output_params = PolicyParams(shape, j.at("output_iterate").at("theta").get<Vec>());
    c.output_agent = j.at("output_iterate").at("agent").get<std::size_t>();
    c.output_iteration = j.at("output_iterate").at("k").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

SeedOutcome execute_run(const RunConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
  RecordWriter writer(dir);
  const auto sidecar_path = dir / "run.json";
  std::ofstream sidecar(sidecar_path, std::ios::binary | std::ios::trunc);
  if (!sidecar) throw IoError("cannot write " + sidecar_path.string());

  const auto policies = initial_policies(cfg.policy, cfg.env.n_agents, seed);
  const MixingMatrix w = cfg.mixing();
  RunResult result =
      run(cfg.algo, policies, w, cfg.train(seed), cfg.episodes, [&](const StepReport& r) { writer.write(r); });
  writer.close();

  Vec curve;
  curve.reserve(result.records.size());
  for (const auto& r : result.records) curve.push_back(r.mean_reward);
  const double final_reward = curve.empty() ? std::nan("") : stats::tail_mean(curve, cfg.final_window);

  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["seed"] = seed;
  j["theory"] = theory_report(cfg);
  j["status"] = result.aborted ? "aborted" : "completed";
  if (result.aborted) j["failure"] = result.failure;
  j["records"] = result.records.size();
  j["final_mean_reward"] = final_reward;
  j["final_window"] = cfg.final_window;
  j["output_iterate"] = {{"agent", result.output_agent},
                         {"k", result.output_iteration},
                         {"available", !result.output_params.empty()}};
  sidecar << j.dump(2) << '\n';
  if (!sidecar) throw IoError("write to " + sidecar_path.string() + " failed");
  if (result.final_state) write_checkpoint(result, dir / "params.json");
  return {seed, std::move(result), final_reward};
}

std::vector<SeedOutcome> execute_runs(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("missing required key 'out'");
  std::vector<SeedOutcome> outcomes;
  const std::filesystem::path base(cfg.out);
  for (const auto seed : cfg.seeds) {
    const auto dir = cfg.seeds.size() == 1 ? base : base / ("seed-" + std::to_string(seed));
    outcomes.push_back(execute_run(cfg, seed, dir));
  }
  return outcomes;
}

}  // namespace mdpgt
