#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fogcache/env/reward.hpp"
#include "fogcache/env/world.hpp"
#include "fogcache/federation/federation.hpp"

namespace fogcache::simctl {

/// Invalid or unparsable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { Dqn, Frlq, Frl, Centralized, Lru, Lfu };

std::string_view policy_name(PolicyKind p);
/// Throws ConfigError for an unknown name.
PolicyKind parse_policy(std::string_view name);
bool is_learning(PolicyKind p);
bool is_federated(PolicyKind p);

enum class RewardMode { Realized, Expected, Gain };

std::string_view reward_mode_name(RewardMode m);
RewardMode parse_reward_mode(std::string_view name);

/// Every run parameter. Defaults are the desk-scale setup with the physical
/// constants of the reference parameter table.
struct SimConfig {
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::Frlq;

  struct Content {
    std::size_t num_contents = 200;
    double content_size_mb = 1.0;
    double skewness = 0.8;
    double plateau = 0.1;
    double shuffle_fraction = 0.0;
  } content;

  struct Network {
    std::size_t num_faps = 10;
    std::size_t users_per_fap = 10;
    std::size_t num_rbs = 10;
    double capacity_mb = 20.0;
    double coverage_radius_m = 150.0;
    double min_distance_m = 10.0;
    double interference_factor = 0.01;
    double pathloss_exponent = 3.0;
  } network;

  struct Radio {
    double rb_bandwidth_hz = 20.0e6;
    double transmit_power_w = 1.0;
    double noise_dbm_per_hz = -174.0;
    double fap_to_fap_delay_s = 0.002;
    double cloud_to_fap_delay_s = 0.010;
  } radio;

  struct Reward {
    env::RewardWeights weights;
    RewardMode mode = RewardMode::Realized;
    double scale = 1.0;  // multiplies the reward fed to learners only
  } reward;

  struct Learning {
    std::vector<std::size_t> hidden_layers{128, 128};
    double learning_rate = 0.001;
    double discount = 0.9;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 10000;
    std::uint64_t target_sync = 100;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.2;
  } learning;

  struct Federation {
    std::size_t periods = 50;
    std::size_t local_updates = 20;
    double keep_fraction = 0.9;
    std::size_t clusters = 32;
    std::uint32_t bit_width = 32;
    bool include_biases = true;
    bool equal_weights = false;
  } federation;

  struct Run {
    std::size_t slots = 5000;
    double warmup_fraction = 0.2;
  } run;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  env::WorldSpec world_spec() const;
  federation::FedConfig fed_config() const;
  /// Cache slots available for eviction actions (capacity / content size).
  std::size_t cache_slots() const;
  std::size_t warmup_slots() const;
};

/// Parses a JSON document over the defaults; unknown keys, wrong types and
/// invalid values raise ConfigError.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig load_config(const std::string& path);

/// Every effective parameter, in the same layout parse_config accepts.
nlohmann::json to_json(const SimConfig& cfg);

}  // namespace fogcache::simctl
