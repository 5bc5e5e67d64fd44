#include <atomic>
#include <thread>

#include "mdpgt/error.hpp"
#include "mdpgt/harness.hpp"

namespace mdpgt {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::vector<SweepPoint> sweep(const KeyValues& base, const std::string& axis, const std::vector<std::string>& values) {
  const auto& keys = config_keys();
  if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == axis; }))
    throw ConfigError("unknown key '" + axis + "' as sweep axis");
  if (axis == "out") throw ConfigError("invalid value for 'axis': out cannot be swept");
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  const RunConfig base_cfg = resolve_config(base);
  if (base_cfg.out.empty()) throw ConfigError("missing required key 'out'");
  const std::filesystem::path root(base_cfg.out);

  // Resolve every point up front so a bad value fails before any run.
  std::vector<RunConfig> configs;
  for (const auto& v : values) {
    KeyValues kv = base;
    kv[axis] = v;
    if (axis == "seed") kv.erase("seeds");
    kv["out"] = (root / (axis + "=" + v)).string();
    configs.push_back(resolve_config(kv));
  }

  std::vector<SweepPoint> points(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        points[i] = {values[i], execute_runs(configs[i])};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min(base_cfg.jobs, values.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto summary_path = root / "summary.csv";
  std::ofstream summary(summary_path, std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError("cannot write " + summary_path.string());
  summary << "axis,value,seed,final_mean_reward,status\n";
  for (const auto& p : points)
    for (const auto& o : p.outcomes)
      summary << axis << ',' << csv_field(p.value) << ',' << o.seed << ',' << format_double(o.final_mean_reward)
              << ',' << (o.result.aborted ? "aborted" : "completed") << '\n';
  if (!summary) throw IoError("write to " + summary_path.string() + " failed");
  return points;
}

}  // namespace mdpgt
