#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mdpgt/decentral.hpp"
#include "mdpgt/theory.hpp"
#include "mdpgt/topology.hpp"

namespace mdpgt {

enum class ScheduleKind { manual, corollary1, corollary2 };

ScheduleKind parse_schedule(const std::string& name);
std::string to_string(ScheduleKind s);

/// Fully resolved run configuration.
struct RunConfig {
  Algorithm algo = Algorithm::mdpgt;
  EnvConfig env{};
  TopologyKind topology = TopologyKind::full;
  std::vector<Edge> edges;  // TopologyKind::custom only
  PolicyShape policy{};     // obs_dim and action count follow the env
  double eta = 1e-3;
  double beta = 0.5;
  std::size_t batch_init = 1;
  std::size_t episodes = 2000;  // K
  Estimator estimator = Estimator::pgt;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
  ScheduleKind schedule = ScheduleKind::manual;
  double x_max = 1.0;        // parameter-norm bound used for the Gaussian C_g
  double is_variance = 1.0;  // M
  double score_bound_g = 1.0;  // C_g, C_h for the MLP family (no closed form)
  double score_bound_h = 1.0;
  std::size_t threads = 1;
  std::size_t jobs = 1;
  std::size_t final_window = 500;

  bool operator==(const RunConfig&) const = default;

  Graph graph() const;
  MixingMatrix mixing() const;
  TrainConfig train(std::uint64_t seed) const;
};

using KeyValues = std::map<std::string, std::string>;

/// Keys accepted in config files and as --flags, in documentation order.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Flat key-value grammar, one entry per line:
///   key = value      (whitespace around key and value is trimmed)
///   # comment        (also after a value)
/// Blank lines are ignored; a later duplicate overrides an earlier one.
KeyValues parse_kv_text(std::string_view text);
KeyValues read_kv_file(const std::filesystem::path& path);

/// Validates keys and values and fills defaults. Required key: algo.
/// Applies the step-size schedule when one is requested.
RunConfig resolve_config(const KeyValues& kv);

/// --key value / --key=value flags; `--config FILE` is read first and the
/// remaining flags override it.
KeyValues parse_flags(const std::vector<std::string>& args);
RunConfig parse_config(const std::vector<std::string>& args);

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
KeyValues to_key_values(const RunConfig& cfg);

/// Theory constants, bounds and schedules implied by a configuration.
nlohmann::json theory_report(const RunConfig& cfg);
ProblemConstants problem_constants(const RunConfig& cfg);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

inline constexpr std::string_view kCsvHeader = "k,agent,reward,mean_reward,consensus_err,tracking_resid,u_norm,clamps";

/// Streams RunRecords as CSV rows. Opening creates the directory and the
/// file, so an unwritable path fails before any training work.
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& dir);
  void write(const StepReport& r);
  void close();
  const std::filesystem::path& csv_path() const noexcept { return csv_path_; }

 private:
  std::filesystem::path csv_path_;
  std::ofstream out_;
};

/// Writes CSV rows for every record into `dir`/records.csv.
void emit_records(const std::vector<StepReport>& records, const std::filesystem::path& dir);

nlohmann::json shape_to_json(const PolicyShape& shape);
PolicyShape shape_from_json(const nlohmann::json& j);

/// Parameters of a finished run: every agent's x_K and the output iterate
/// x~_K, as flat arrays under a policy-shape header.
struct Checkpoint {
  std::vector<PolicyParams> final_params;
  PolicyParams output_params;
  std::size_t output_agent = 0;
  std::size_t output_iteration = 0;
};

void write_checkpoint(const RunResult& result, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct SeedOutcome {
  std::uint64_t seed;
  RunResult result;
  double final_mean_reward;
};

/// One training run for one seed: `dir`/records.csv, `dir`/run.json holding
/// the resolved config, theory constants and run status, and
/// `dir`/params.json when the run completes.
SeedOutcome execute_run(const RunConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir);

/// Every seed of the config. A single seed writes straight into cfg.out,
/// several seeds into cfg.out/seed-<s>.
std::vector<SeedOutcome> execute_runs(const RunConfig& cfg);

struct SweepPoint {
  std::string value;
  std::vector<SeedOutcome> outcomes;
};

/// One configuration per value of `axis`, each written to
/// base.out/<axis>=<value>, plus base.out/summary.csv with the final-window
/// mean reward of every (value, seed).
std::vector<SweepPoint> sweep(const KeyValues& base, const std::string& axis, const std::vector<std::string>& values);

}  // namespace mdpgt
