#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogcache/simctl/config.hpp"
#include "fogcache/simctl/experiment.hpp"
#include "fogcache/simctl/metrics.hpp"
#include "fogcache/simctl/simulator.hpp"

namespace fs = std::filesystem;
using namespace fogcache;
using namespace fogcache::simctl;

namespace {

SimConfig tiny(PolicyKind p = PolicyKind::Lru, std::size_t faps = 3) {
  SimConfig c;
  c.policy = p;
  c.content.num_contents = 30;
  c.network.num_faps = faps;
  c.network.users_per_fap = 5;
  c.network.capacity_mb = 5.0;
  c.learning.hidden_layers = {16};
  c.learning.batch_size = 8;
  c.learning.replay_capacity = 200;
  c.federation.periods = 10;
  c.federation.local_updates = 5;
  c.run.slots = 300;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fogcache_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Metrics, HitRateExamples) {
  using env::Route;
  EXPECT_DOUBLE_EQ(*hit_rate(std::vector<Route>{Route::Local, Route::Local}), 1.0);
  EXPECT_DOUBLE_EQ(*hit_rate(std::vector<Route>{Route::Cloud, Route::Cloud}), 0.0);
  EXPECT_DOUBLE_EQ(
      *hit_rate(std::vector<Route>{Route::Local, Route::Neighbor, Route::Local, Route::Cloud, Route::Local}), 0.6);
  EXPECT_FALSE(hit_rate({}).has_value());
}

TEST(Metrics, AverageDelay) {
  std::vector<env::ServiceOutcome> o(3);
  o[0].delay_s = o[1].delay_s = o[2].delay_s = 0.07;
  EXPECT_DOUBLE_EQ(avg_request_delay(o), 0.07);
  o.push_back({env::Route::Cloud, 0, 0.07, 0.08});
  EXPECT_GT(avg_request_delay(o), 0.07);
  EXPECT_THROW(avg_request_delay({}), std::invalid_argument);
}

TEST(Metrics, SummarySkipsWarmup) {
  std::vector<SlotMetrics> s(4);
  for (std::size_t i = 0; i < 4; ++i) {
    s[i].slot = i;
    s[i].mean_hit_rate = double(i);
    s[i].avg_delay = 1.0;
    s[i].local = i;
    s[i].cloud = 4 - i;
    s[i].cumulative_reward = -double(i);
  }
  const auto sum = summarize(s, 2);
  EXPECT_EQ(sum.slots_measured, 2u);
  EXPECT_DOUBLE_EQ(sum.hit_rate, 2.5);
  EXPECT_DOUBLE_EQ(sum.local_fraction, 5.0 / 8.0);
  EXPECT_DOUBLE_EQ(sum.cumulative_reward, -3.0);
}

TEST(Config, DefaultsMirrorParameterTable) {
  const SimConfig c;
  EXPECT_EQ(c.content.skewness, 0.8);
  EXPECT_EQ(c.content.plateau, 0.1);
  EXPECT_EQ(c.radio.rb_bandwidth_hz, 20e6);
  EXPECT_EQ(c.radio.transmit_power_w, 1.0);
  EXPECT_EQ(c.radio.noise_dbm_per_hz, -174.0);
  EXPECT_EQ(c.network.num_faps, 10u);
  EXPECT_EQ(c.radio.fap_to_fap_delay_s, 0.002);
  EXPECT_EQ(c.radio.cloud_to_fap_delay_s, 0.010);
  EXPECT_EQ(c.reward.weights.local, 0.1);
  EXPECT_EQ(c.reward.weights.neighbor, 0.2);
  EXPECT_EQ(c.reward.weights.cloud, 0.7);
  EXPECT_EQ(c.learning.learning_rate, 0.001);
  EXPECT_EQ(c.learning.discount, 0.9);
  EXPECT_EQ(c.content.num_contents, 200u);
  EXPECT_EQ(c.cache_slots(), 20u);
  EXPECT_EQ(c.run.slots, 5000u);
  EXPECT_EQ(c.warmup_slots(), 1000u);
}

TEST(Config, RoundTripAndEcho) {
  auto c = tiny(PolicyKind::Frlq);
  c.seed = 99;
  c.federation.keep_fraction = 0.8;
  const auto j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j)), j);
  EXPECT_EQ(j.at("policy"), "frlq");
  EXPECT_EQ(j.at("seed"), 99);
  // Every section is echoed in full, defaults included.
  EXPECT_EQ(j.at("radio").size(), 5u);
  EXPECT_EQ(parse_config(nlohmann::json::object()).network.num_faps, 10u);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(parse_config({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(parse_config({{"content", {{"skew", 1.0}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"content", {{"skewness", "high"}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"federation", {{"keep_fraction", 0.0}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"learning", {{"discount", 1.0}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"reward", {{"zeta_local", 0.5}}}}), ConfigError);
  EXPECT_THROW(parse_config({{"policy", "random"}}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/fogcache.json"), ConfigError);
}

TEST(Config, Overrides) {
  const SimConfig c;
  EXPECT_EQ(with_override(c, "network.capacity_mb", 40.0).network.capacity_mb, 40.0);
  EXPECT_EQ(with_override(c, "seed", 5).seed, 5u);
  EXPECT_EQ(with_override(c, "policy", "lfu").policy, PolicyKind::Lfu);
  EXPECT_THROW(with_override(c, "network.cap", 1.0), ConfigError);
  EXPECT_THROW(with_override(c, "network", 1.0), ConfigError);
  const auto [k, v] = parse_assignment("content.skewness=1.2");
  EXPECT_EQ(k, "content.skewness");
  EXPECT_EQ(v, 1.2);
  EXPECT_EQ(parse_assignment("policy=lru").second, "lru");
  EXPECT_THROW(parse_assignment("novalue"), ConfigError);
}

TEST(Config, ShippedFilesLoad) {
  const std::string dir = FOGCACHE_CONFIG_DIR;
  EXPECT_EQ(to_json(load_config(dir + "/default.json")), to_json(SimConfig{}));
  EXPECT_EQ(load_config(dir + "/desk.json").network.num_faps, 5u);
  EXPECT_EQ(load_config(dir + "/full-scale.json").content.num_contents, 1000u);
}

TEST(Simulator, ConservationAndRanges) {
  for (auto p : {PolicyKind::Lru, PolicyKind::Lfu, PolicyKind::Dqn, PolicyKind::Frlq, PolicyKind::Frl,
                 PolicyKind::Centralized}) {
    const auto cfg = tiny(p);
    const auto r = run_simulation(cfg);
    ASSERT_EQ(r.slots.size(), 300u);
    for (const auto& s : r.slots) {
      EXPECT_EQ(s.local + s.neighbor + s.cloud, 15u);
      for (double h : s.hit_rate) {
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
      }
      EXPECT_GE(s.avg_delay, 0.0);
    }
    EXPECT_EQ(r.summary.slots_measured, 240u);
    EXPECT_NEAR(r.summary.local_fraction + r.summary.neighbor_fraction + r.summary.cloud_fraction, 1.0, 1e-12);
    EXPECT_EQ(r.uploaded_ratio.has_value(), is_federated(p));
    EXPECT_EQ(r.rounds.size(), is_federated(p) ? 10u : 0u);
  }
}

TEST(Simulator, CommonRandomNumbers) {
  const auto a = run_simulation(tiny(PolicyKind::Lru), true);
  const auto b = run_simulation(tiny(PolicyKind::Dqn), true);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    ASSERT_EQ(a.trace[i].content, b.trace[i].content);
    ASSERT_EQ(a.trace[i].user, b.trace[i].user);
  }
}

TEST(Simulator, Deterministic) {
  const auto cfg = tiny(PolicyKind::Frlq);
  const auto a = run_simulation(cfg, true), b = run_simulation(cfg, true);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.model_checksum, b.model_checksum);
  EXPECT_EQ(a.losses, b.losses);
}

TEST(Simulator, EverythingFitsGivesFullHits) {
  for (auto p : {PolicyKind::Lru, PolicyKind::Lfu}) {
    auto cfg = tiny(p, 1);
    cfg.network.capacity_mb = 30.0;
    const auto r = run_simulation(cfg);
    EXPECT_EQ(r.decisions, 0u);
    EXPECT_DOUBLE_EQ(r.slots.back().mean_hit_rate, 1.0);
  }
}

TEST(Simulator, SingleFapLearnersAgree) {
  // With one F-AP the centralized learner and a lone uncompressed federated
  // learner are both plain DQN.
  auto base = tiny(PolicyKind::Dqn, 1);
  base.federation.keep_fraction = 1.0;
  const auto dqn = run_simulation(base, true);
  base.policy = PolicyKind::Centralized;
  const auto central = run_simulation(base, true);
  base.policy = PolicyKind::Frl;
  const auto frl = run_simulation(base, true);
  EXPECT_EQ(dqn.trace, central.trace);
  EXPECT_EQ(dqn.trace, frl.trace);
  EXPECT_GT(dqn.decisions, 0u);
}

TEST(Simulator, CapacityHeldEveryRun) {
  auto cfg = tiny(PolicyKind::Dqn);
  Simulator sim(cfg);
  sim.run();
  sim.world().check_capacity();
  for (const auto& f : sim.world().faps) EXPECT_LE(f.occupied(), cfg.cache_slots());
}

TEST(Experiment, ArtifactsAndSchema) {
  const auto dir = scratch("artifacts");
  auto cfg = tiny(PolicyKind::Frlq);
  run_experiment(cfg, dir);
  const auto metrics = slurp(dir / "metrics.csv");
  const auto rounds = slurp(dir / "rounds.csv");
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary.at("config"), to_json(cfg));
  EXPECT_FALSE(summary.at("uploaded_ratio").is_null());
  EXPECT_EQ(summary.at("model_checksum").get<std::string>().size(), 16u);

  const auto schema = nlohmann::json::parse(slurp(fs::path(FOGCACHE_CONFIG_DIR) / "csv_schema.json"));
  auto names = [&](const std::string& file, std::size_t faps) {
    std::vector<std::string> out;
    for (const auto& c : schema.at("files").at(file).at("columns")) {
      if (c.contains("name")) {
        out.push_back(c.at("name"));
      } else {
        for (std::size_t n = 0; n < faps; ++n) out.push_back("hit_rate_" + std::to_string(n));
      }
    }
    return out;
  };
  auto header = [](const std::string& text) {
    std::vector<std::string> out;
    std::stringstream line(text.substr(0, text.find('\n')));
    for (std::string col; std::getline(line, col, ',');) out.push_back(col);
    return out;
  };
  EXPECT_EQ(header(metrics), names("metrics.csv", 3));
  EXPECT_EQ(header(rounds), names("rounds.csv", 0));
  // The last metrics row carries a finite uploaded ratio.
  const auto last = metrics.substr(metrics.rfind('\n', metrics.size() - 2) + 1);
  EXPECT_EQ(last.find("nan"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Experiment, HeuristicRoundsFileIsHeaderOnly) {
  const auto dir = scratch("lru");
  run_experiment(tiny(PolicyKind::Lru), dir);
  const auto rounds = slurp(dir / "rounds.csv");
  EXPECT_EQ(std::count(rounds.begin(), rounds.end(), '\n'), 1);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(summary.at("uploaded_ratio").is_null());
  fs::remove_all(dir);
}

TEST(Experiment, CompareAndSweep) {
  const std::vector<PolicyKind> pols{PolicyKind::Lru, PolicyKind::Lfu};
  const std::vector<std::uint64_t> seeds{0, 1};
  Sweep sw{"network.capacity_mb", {2.0, 5.0, 10.0}};
  const auto rows = compare_policies(tiny(), pols, seeds, sw);
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].sweep_value, "2.0");
  const auto means = average_over_seeds(rows);
  ASSERT_EQ(means.size(), 6u);
  for (const auto& m : means) EXPECT_EQ(m.seeds, 2u);
  std::ostringstream out;
  write_compare_csv(out, rows);
  const auto s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 13);
  const auto schema = nlohmann::json::parse(slurp(fs::path(FOGCACHE_CONFIG_DIR) / "csv_schema.json"));
  std::string expect;
  for (const auto& c : schema.at("files").at("compare.csv").at("columns")) {
    expect += (expect.empty() ? "" : ",") + c.at("name").get<std::string>();
  }
  EXPECT_EQ(s.substr(0, s.find('\n')), expect);
}

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(FOGCACHE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  EXPECT_EQ(cli("run --policy nope --out " + dir.string()), 2);
  EXPECT_EQ(cli("run --config /nonexistent.json --out " + dir.string()), 2);
  EXPECT_EQ(cli("run --set network.capacity=3 --out " + dir.string()), 2);
  EXPECT_EQ(cli("run --keep 1.5 --out " + dir.string()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"content\": {";
  }
  EXPECT_EQ(cli("run --config " + (dir / "bad.json").string() + " --out " + dir.string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, RunIsByteIdentical) {
  const auto a = scratch("cli_a"), b = scratch("cli_b");
  const std::string common = "run --policy lru --seed 7 --set network.num_faps=3 --set run.slots=400 --out ";
  ASSERT_EQ(cli(common + a.string()), 0);
  ASSERT_EQ(cli(common + b.string()), 0);
  for (const char* f : {"metrics.csv", "rounds.csv", "summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto s = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(s.at("config").at("seed"), 7);
  EXPECT_EQ(s.at("config").at("policy"), "lru");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, TheoremsWritesCsv) {
  const auto dir = scratch("theorems");
  ASSERT_EQ(cli("theorems --steps 20 --replicas 20 --out " + dir.string()), 0);
  const auto text = slurp(dir / "theorems.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "instance,clients,local_steps,family,t,phi,delta,delta_se,next_delta,theorem1_rhs,theorem2_bound,"
            "theorem1_holds,theorem2_holds");
  fs::remove_all(dir);
}
