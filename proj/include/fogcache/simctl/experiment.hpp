#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogcache/simctl/config.hpp"
#include "fogcache/simctl/simulator.hpp"

namespace fogcache::simctl {

/// One row per slot: slot, policy, mean_hit_rate, hit_rate_0..hit_rate_{N-1},
/// avg_delay, local, neighbor, cloud, reward, cumulative_reward, epsilon,
/// uploaded_ratio.
void write_metrics_csv(std::ostream& out, const RunResult& result, std::size_t num_faps,
                       PolicyKind policy);

/// Run summary: the full effective config, post-warm-up averages, decision
/// and training counts, loss deciles and the final model checksum. Holds no
/// timing data, so equal runs give equal documents.
nlohmann::json summary_json(const SimConfig& cfg, const RunResult& result);

/// Runs the configured simulation and writes metrics.csv, rounds.csv and
/// summary.json into `out_dir` (created if missing). Non-federated runs get a
/// header-only rounds.csv.
RunResult run_experiment(const SimConfig& cfg, const std::filesystem::path& out_dir);

/// Returns a copy of `cfg` with "section.key" (or "seed" / "policy") set to
/// `value`; throws ConfigError for unknown keys or invalid values.
SimConfig with_override(const SimConfig& cfg, const std::string& key, const nlohmann::json& value);

/// Parses "section.key=<json>" into an override; a value that is not valid
/// JSON is taken as a string.
std::pair<std::string, nlohmann::json> parse_assignment(const std::string& text);

struct Sweep {
  std::string key;                    // e.g. "network.capacity_mb"
  std::vector<nlohmann::json> values;
};

struct CompareRow {
  std::string sweep_key;    // empty without a sweep
  std::string sweep_value;  // JSON text of the swept value
  PolicyKind policy = PolicyKind::Lru;
  std::uint64_t seed = 0;
  Summary summary;
  std::optional<double> uploaded_ratio;
};

using CompareProgress = std::function<void(const CompareRow&)>;

/// Every policy at every (sweep value, seed). Runs sharing a seed share the
/// world and the request trace.
std::vector<CompareRow> compare_policies(const SimConfig& base, std::span<const PolicyKind> policies,
                                         std::span<const std::uint64_t> seeds,
                                         const std::optional<Sweep>& sweep = std::nullopt,
                                         const CompareProgress& progress = {});

/// Columns sweep_key, sweep_value, policy, seed, hit_rate, avg_delay,
/// local_fraction, neighbor_fraction, cloud_fraction, cumulative_reward,
/// uploaded_ratio.
void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);

/// Seed-averaged summaries keyed by (sweep value, policy), in first-seen order.
struct CompareMean {
  std::string sweep_value;
  PolicyKind policy = PolicyKind::Lru;
  std::size_t seeds = 0;
  double hit_rate = 0.0;
  double avg_delay = 0.0;
};
std::vector<CompareMean> average_over_seeds(std::span<const CompareRow> rows);

}  // namespace fogcache::simctl
