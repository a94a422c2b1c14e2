#include "fogcache/simctl/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>

namespace fogcache::simctl {

using nlohmann::json;

std::string_view policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::Dqn: return "dqn";
    case PolicyKind::Frlq: return "frlq";
    case PolicyKind::Frl: return "frl";
    case PolicyKind::Centralized: return "centralized";
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Lfu: return "lfu";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  for (const auto p : {PolicyKind::Dqn, PolicyKind::Frlq, PolicyKind::Frl, PolicyKind::Centralized,
                       PolicyKind::Lru, PolicyKind::Lfu}) {
    if (policy_name(p) == name) return p;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

bool is_learning(PolicyKind p) { return p != PolicyKind::Lru && p != PolicyKind::Lfu; }
bool is_federated(PolicyKind p) { return p == PolicyKind::Frlq || p == PolicyKind::Frl; }

std::string_view reward_mode_name(RewardMode m) {
  switch (m) {
    case RewardMode::Realized: return "realized";
    case RewardMode::Expected: return "expected";
    case RewardMode::Gain: return "gain";
  }
  return "?";
}

RewardMode parse_reward_mode(std::string_view name) {
  if (name == "realized") return RewardMode::Realized;
  if (name == "expected") return RewardMode::Expected;
  if (name == "gain") return RewardMode::Gain;
  throw ConfigError("unknown reward mode '" + std::string(name) + "'");
}

namespace {

// Visits every (section, key, field); section "" is the top level.
template <typename Cfg, typename V>
void visit(Cfg& c, V&& v) {
  v("", "seed", c.seed);
  v("", "policy", c.policy);
  v("content", "num_contents", c.content.num_contents);
  v("content", "content_size_mb", c.content.content_size_mb);
  v("content", "skewness", c.content.skewness);
  v("content", "plateau", c.content.plateau);
  v("content", "shuffle_fraction", c.content.shuffle_fraction);
  v("network", "num_faps", c.network.num_faps);
  v("network", "users_per_fap", c.network.users_per_fap);
  v("network", "num_rbs", c.network.num_rbs);
  v("network", "capacity_mb", c.network.capacity_mb);
  v("network", "coverage_radius_m", c.network.coverage_radius_m);
  v("network", "min_distance_m", c.network.min_distance_m);
  v("network", "interference_factor", c.network.interference_factor);
  v("network", "pathloss_exponent", c.network.pathloss_exponent);
  v("radio", "rb_bandwidth_hz", c.radio.rb_bandwidth_hz);
  v("radio", "transmit_power_w", c.radio.transmit_power_w);
  v("radio", "noise_dbm_per_hz", c.radio.noise_dbm_per_hz);
  v("radio", "fap_to_fap_delay_s", c.radio.fap_to_fap_delay_s);
  v("radio", "cloud_to_fap_delay_s", c.radio.cloud_to_fap_delay_s);
  v("reward", "zeta_local", c.reward.weights.local);
  v("reward", "zeta_neighbor", c.reward.weights.neighbor);
  v("reward", "zeta_cloud", c.reward.weights.cloud);
  v("reward", "mode", c.reward.mode);
  v("reward", "scale", c.reward.scale);
  v("learning", "hidden_layers", c.learning.hidden_layers);
  v("learning", "learning_rate", c.learning.learning_rate);
  v("learning", "discount", c.learning.discount);
  v("learning", "batch_size", c.learning.batch_size);
  v("learning", "replay_capacity", c.learning.replay_capacity);
  v("learning", "target_sync", c.learning.target_sync);
  v("learning", "epsilon_start", c.learning.epsilon_start);
  v("learning", "epsilon_end", c.learning.epsilon_end);
  v("learning", "epsilon_decay_fraction", c.learning.epsilon_decay_fraction);
  v("federation", "periods", c.federation.periods);
  v("federation", "local_updates", c.federation.local_updates);
  v("federation", "keep_fraction", c.federation.keep_fraction);
  v("federation", "clusters", c.federation.clusters);
  v("federation", "bit_width", c.federation.bit_width);
  v("federation", "include_biases", c.federation.include_biases);
  v("federation", "equal_weights", c.federation.equal_weights);
  v("run", "slots", c.run.slots);
  v("run", "warmup_fraction", c.run.warmup_fraction);
}

template <typename T>
json encode(const T& v) {
  if constexpr (std::is_same_v<T, PolicyKind>) {
    return std::string(policy_name(v));
  } else if constexpr (std::is_same_v<T, RewardMode>) {
    return std::string(reward_mode_name(v));
  } else {
    return v;
  }
}

template <typename T>
void decode(const json& j, T& out) {
  if constexpr (std::is_same_v<T, PolicyKind>) {
    out = parse_policy(j.get<std::string>());
  } else if constexpr (std::is_same_v<T, RewardMode>) {
    out = parse_reward_mode(j.get<std::string>());
  } else if constexpr (std::is_same_v<T, double>) {
    if (!j.is_number()) throw ConfigError("expected a number");
    out = j.get<double>();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError("expected true or false");
    out = j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      throw ConfigError("expected a non-negative integer");
    }
    out = j.get<T>();
  } else {
    if (!j.is_array()) throw ConfigError("expected an array");
    T tmp;
    for (const auto& e : j) {
      typename T::value_type x{};
      decode(e, x);
      tmp.push_back(x);
    }
    out = std::move(tmp);
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void SimConfig::validate() const {
  require(content.num_contents >= 1, "content.num_contents must be at least 1");
  require(content.content_size_mb > 0.0, "content.content_size_mb must be positive");
  require(content.skewness >= 0.0 && content.plateau >= 0.0, "content.skewness and plateau must be non-negative");
  require(content.shuffle_fraction >= 0.0 && content.shuffle_fraction <= 1.0, "content.shuffle_fraction must lie in [0, 1]");
  require(network.num_faps >= 1 && network.users_per_fap >= 1 && network.num_rbs >= 1,
          "network counts must be at least 1");
  require(network.capacity_mb >= 0.0, "network.capacity_mb must be non-negative");
  require(network.min_distance_m > 0.0 && network.coverage_radius_m > network.min_distance_m,
          "network distances need 0 < min_distance_m < coverage_radius_m");
  require(network.interference_factor >= 0.0, "network.interference_factor must be non-negative");
  require(network.pathloss_exponent > 0.0, "network.pathloss_exponent must be positive");
  require(radio.rb_bandwidth_hz > 0.0 && radio.transmit_power_w > 0.0, "radio bandwidth and power must be positive");
  require(std::isfinite(radio.noise_dbm_per_hz), "radio.noise_dbm_per_hz must be finite");
  require(radio.fap_to_fap_delay_s > 0.0 && radio.cloud_to_fap_delay_s > 0.0, "radio backhaul delays must be positive");
  try {
    reward.weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(!learning.hidden_layers.empty(), "learning.hidden_layers must not be empty");
  for (const auto h : learning.hidden_layers) require(h >= 1, "learning.hidden_layers entries must be positive");
  require(reward.scale > 0.0, "reward.scale must be positive");
  require(learning.learning_rate > 0.0, "learning.learning_rate must be positive");
  require(learning.discount >= 0.0 && learning.discount < 1.0, "learning.discount must lie in [0, 1)");
  require(learning.batch_size >= 1, "learning.batch_size must be at least 1");
  require(learning.replay_capacity >= learning.batch_size, "learning.replay_capacity must hold a batch");
  require(learning.target_sync >= 1, "learning.target_sync must be at least 1");
  require(learning.epsilon_start >= 0.0 && learning.epsilon_start <= 1.0 && learning.epsilon_end >= 0.0 &&
              learning.epsilon_end <= 1.0,
          "learning epsilons must lie in [0, 1]");
  require(learning.epsilon_decay_fraction >= 0.0 && learning.epsilon_decay_fraction <= 1.0,
          "learning.epsilon_decay_fraction must lie in [0, 1]");
  require(federation.periods >= 1 && federation.local_updates >= 1, "federation periods and local_updates must be at least 1");
  require(federation.keep_fraction > 0.0 && federation.keep_fraction <= 1.0, "federation.keep_fraction must lie in (0, 1]");
  require(federation.clusters >= 1, "federation.clusters must be at least 1");
  require(federation.bit_width >= 1, "federation.bit_width must be at least 1");
  require(run.slots >= 1, "run.slots must be at least 1");
  require(run.slots >= federation.periods, "run.slots must be at least federation.periods");
  require(run.warmup_fraction >= 0.0 && run.warmup_fraction < 1.0, "run.warmup_fraction must lie in [0, 1)");
}

env::WorldSpec SimConfig::world_spec() const {
  env::WorldSpec s;
  s.num_contents = content.num_contents;
  s.content_size_mb = content.content_size_mb;
  s.num_faps = network.num_faps;
  s.users_per_fap = network.users_per_fap;
  s.num_rbs = network.num_rbs;
  s.capacity_mb = network.capacity_mb;
  s.skewness = content.skewness;
  s.plateau = content.plateau;
  s.shuffle_fraction = content.shuffle_fraction;
  s.coverage_radius_m = network.coverage_radius_m;
  s.min_distance_m = network.min_distance_m;
  s.interference_factor = network.interference_factor;
  s.delay.rb_bandwidth_hz = radio.rb_bandwidth_hz;
  s.delay.transmit_power_w = radio.transmit_power_w;
  s.delay.noise_density_w_per_hz = env::noise_density_w_per_hz(radio.noise_dbm_per_hz);
  s.delay.fap_to_fap_delay_s = radio.fap_to_fap_delay_s;
  s.delay.cloud_to_fap_delay_s = radio.cloud_to_fap_delay_s;
  s.delay.pathloss_exponent = network.pathloss_exponent;
  return s;
}

federation::FedConfig SimConfig::fed_config() const {
  federation::FedConfig f;
  f.periods = federation.periods;
  f.local_updates = federation.local_updates;
  f.quantize = policy == PolicyKind::Frlq;
  f.compression.keep_fraction = federation.keep_fraction;
  f.compression.clusters = federation.clusters;
  f.compression.bit_width = federation.bit_width;
  f.compression.include_biases = federation.include_biases;
  f.equal_weights = federation.equal_weights;
  return f;
}

std::size_t SimConfig::cache_slots() const {
  return static_cast<std::size_t>(std::floor(network.capacity_mb / content.content_size_mb + 1e-9));
}

std::size_t SimConfig::warmup_slots() const {
  return static_cast<std::size_t>(std::floor(run.warmup_fraction * static_cast<double>(run.slots)));
}

SimConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  SimConfig cfg;
  std::set<std::string> known_top;
  std::map<std::string, std::set<std::string>> known;
  visit(cfg, [&](const char* section, const char* key, auto&) {
    if (*section == '\0') {
      known_top.insert(key);
    } else {
      known_top.insert(section);
      known[section].insert(key);
    }
  });
  for (const auto& [k, v] : doc.items()) {
    if (!known_top.count(k)) throw ConfigError("unknown key '" + k + "'");
    if (known.count(k)) {
      if (!v.is_object()) throw ConfigError("section '" + k + "' must be an object");
      for (const auto& [kk, vv] : v.items()) {
        if (!known[k].count(kk)) throw ConfigError("unknown key '" + k + "." + kk + "'");
      }
    }
  }
  visit(cfg, [&](const char* section, const char* key, auto& field) {
    const json* node = &doc;
    std::string where = key;
    if (*section != '\0') {
      if (!doc.contains(section)) return;
      node = &doc.at(section);
      where = std::string(section) + "." + key;
    }
    if (!node->contains(key)) return;
    try {
      decode(node->at(key), field);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  });
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const SimConfig& cfg) {
  json out = json::object();
  visit(cfg, [&](const char* section, const char* key, const auto& field) {
    if (*section == '\0') {
      out[key] = encode(field);
    } else {
      out[section][key] = encode(field);
    }
  });
  return out;
}

}  // namespace fogcache::simctl
