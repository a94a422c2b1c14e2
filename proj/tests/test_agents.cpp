#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fogcache/agents/dqn.hpp"
#include "fogcache/agents/policy.hpp"
#include "fogcache/env/world.hpp"

using namespace fogcache;
using namespace fogcache::agents;

namespace {

env::FapState fap_with(std::initializer_list<env::ContentId> ids, double capacity = 3.0) {
  env::UserLink u{50.0, {1, 0}};
  env::FapState f(0, capacity, 8, {u});
  for (auto id : ids) f.insert(id, 1.0);
  return f;
}

}  // namespace

TEST(StateEncoder, Layout) {
  const auto fap = fap_with({1, 4});
  StateEncoder enc(8, 5);
  EXPECT_EQ(enc.dim(), 17u);
  const auto s = enc.encode(fap, 6, 2);
  std::vector<double> expect(17, 0.0);
  expect[1] = expect[4] = 1.0;
  expect[8 + 6] = 1.0;
  expect[16] = 0.5;
  EXPECT_EQ(s, expect);
  EXPECT_THROW(enc.encode(fap, 8, 0), std::invalid_argument);
  EXPECT_THROW(enc.encode(fap, 0, 5), std::invalid_argument);
}

TEST(Actions, SlotNumbering) {
  const auto fap = fap_with({7, 2, 5});
  EXPECT_EQ(valid_actions(fap), 4u);
  EXPECT_FALSE(evicted_content(fap, 0).has_value());
  EXPECT_EQ(*evicted_content(fap, 1), 2u);
  EXPECT_EQ(*evicted_content(fap, 3), 7u);
  EXPECT_THROW(evicted_content(fap, 4), std::out_of_range);
  EXPECT_EQ(action_for(fap, 5), 2u);
  EXPECT_THROW(action_for(fap, 3), env::CacheError);
}

TEST(Heuristics, LruEvictsOldest) {
  const auto fap = fap_with({1, 2, 3});
  LruPolicy p(8);
  for (env::ContentId f : {2, 1, 3, 2, 1}) p.on_request(f);
  std::vector<double> state;
  EXPECT_EQ(*evicted_content(fap, p.act({fap, 6, state})), 3u);
}

TEST(Heuristics, LfuEvictsLeastFrequentTiesLow) {
  const auto fap = fap_with({1, 2, 3});
  LfuPolicy p(8);
  for (env::ContentId f : {1, 1, 2, 3, 3}) p.on_request(f);
  std::vector<double> state;
  EXPECT_EQ(*evicted_content(fap, p.act({fap, 6, state})), 2u);
  p.on_request(2);
  EXPECT_EQ(*evicted_content(fap, p.act({fap, 6, state})), 1u);
}

TEST(Heuristics, EmptyCacheHasNoVictim) {
  PolicyStats s(4);
  EXPECT_THROW(lru_victim(s, {}), env::CacheError);
  EXPECT_THROW(lfu_victim(s, {}), env::CacheError);
}

TEST(EpsilonGreedy, GreedyAndRandom) {
  Rng rng(1);
  const std::vector<double> q{0.1, 0.9, 0.9, 5.0};
  EXPECT_EQ(epsilon_greedy(q, 3, 0.0, rng), 1u);  // tie to lower, last entry invalid
  std::vector<int> c(3, 0);
  const int n = 30000;
  for (int i = 0; i < n; ++i) ++c[epsilon_greedy(q, 3, 1.0, rng)];
  for (int x : c) EXPECT_NEAR(x / double(n), 1.0 / 3.0, 4.0 * std::sqrt(2.0 / 9.0 / n));
}

TEST(Dqn, LearnsContextualBandit) {
  // Two states; the rewarded action is 1 in state a and 2 in state b.
  neural::NetShape shape{2, {16}, 3};
  DqnConfig cfg;
  cfg.gamma = 0.0;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 16;
  cfg.replay_capacity = 500;
  cfg.train_on_observe = false;
  DqnAgent agent(shape, cfg, 1, 2);
  Rng rng(3);
  const std::vector<double> sa{1.0, 0.0}, sb{0.0, 1.0};
  for (int i = 0; i < 400; ++i) {
    const bool first = rng.uniform() < 0.5;
    const auto a = static_cast<std::uint32_t>(rng.below(3));
    const double r = (first && a == 1) || (!first && a == 2) ? 1.0 : 0.0;
    agent.remember({first ? sa : sb, a, r, first ? sa : sb});
  }
  for (int i = 0; i < 1500; ++i) agent.train_step();
  EXPECT_EQ(agent.greedy(sa, 3), 1u);
  EXPECT_EQ(agent.greedy(sb, 3), 2u);
  EXPECT_EQ(agent.train_steps(), 1500u);
  EXPECT_LT(*agent.last_loss(), 0.05);
}

TEST(Dqn, TrainsOnlyWithFullBatch) {
  neural::NetShape shape{2, {4}, 2};
  DqnConfig cfg;
  cfg.batch_size = 4;
  DqnAgent agent(shape, cfg, 1, 2);
  for (int i = 0; i < 3; ++i) agent.observe({{0.0, 1.0}, 0, 1.0, {1.0, 0.0}});
  EXPECT_EQ(agent.train_steps(), 0u);
  EXPECT_FALSE(agent.train_step().has_value());
  agent.observe({{0.0, 1.0}, 1, 1.0, {1.0, 0.0}});
  EXPECT_EQ(agent.train_steps(), 1u);
}

TEST(Dqn, TargetSyncsEveryM) {
  neural::NetShape shape{2, {4}, 2};
  DqnConfig cfg;
  cfg.batch_size = 2;
  cfg.target_sync = 3;
  cfg.train_on_observe = false;
  DqnAgent agent(shape, cfg, 1, 2);
  for (int i = 0; i < 4; ++i) agent.remember({{0.5, double(i)}, std::uint32_t(i % 2), 1.0, {0.0, 0.0}});
  const auto initial = agent.target().params();
  agent.train_step();
  agent.train_step();
  EXPECT_EQ(agent.target().params(), initial);
  agent.train_step();
  EXPECT_EQ(agent.target().params(), agent.net().params());
}

TEST(Dqn, SeedsFixEverything) {
  neural::NetShape shape{3, {5}, 2};
  DqnConfig cfg;
  cfg.batch_size = 2;
  DqnAgent a(shape, cfg, 7, 8), b(shape, cfg, 7, 8);
  for (int i = 0; i < 10; ++i) {
    neural::Experience e{{0.1 * i, 0.2, -0.3}, std::uint32_t(i % 2), 0.5, {0.0, 0.1, 0.2}};
    a.observe(e);
    b.observe(e);
  }
  EXPECT_EQ(a.net().params(), b.net().params());
  EXPECT_EQ(a.memory().size(), 10u);
}

TEST(Dqn, LoadReplacesPredictionOnly) {
  neural::NetShape shape{3, {5}, 2};
  DqnAgent a(shape, {}, 1, 2), b(shape, {}, 3, 4);
  const auto target = a.target().params();
  a.load(b.net().params());
  EXPECT_EQ(a.net().params(), b.net().params());
  EXPECT_EQ(a.target().params(), target);
  EXPECT_THROW(a.load(neural::LayeredParams({neural::Layer(3, 5)})), neural::ShapeError);
}

TEST(Centralized, HandlesShareOneLearner) {
  neural::NetShape shape{3, {5}, 2};
  DqnConfig cfg;
  cfg.batch_size = 2;
  CentralizedAgent c(3, shape, cfg, 1, 2);
  c.handle(0).observe({{0.0, 0.0, 1.0}, 0, 1.0, {0.0, 0.0, 0.0}});
  c.handle(2).observe({{1.0, 0.0, 0.0}, 1, 0.0, {0.0, 0.0, 0.0}});
  EXPECT_EQ(c.core().memory().size(), 2u);
  EXPECT_EQ(c.core().train_steps(), 1u);
  EXPECT_EQ(c.handle(1).name(), "centralized");
}
