#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fogcache/env/channel.hpp"
#include "fogcache/env/popularity.hpp"
#include "fogcache/env/reward.hpp"
#include "fogcache/env/world.hpp"

using namespace fogcache;
using namespace fogcache::env;

TEST(Popularity, MzipfMatchesOracle) {
  // (r + 1 + 0.1)^-0.8 over ranks 0..4, normalized; evaluated at 30 digits.
  const std::vector<std::uint32_t> rank{0, 1, 2, 3, 4};
  const auto p = mzipf(rank, 0.8, 0.1);
  const double expect[] = {0.37385334724044366, 0.22286403319600362, 0.16320222164988719,
                           0.13049333670310069, 0.10958706121056484};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p[i], expect[i], 1e-15);
}

TEST(Popularity, ZeroSkewIsUniform) {
  const std::vector<std::uint32_t> rank{3, 0, 2, 1};
  for (double v : mzipf(rank, 0.0, 0.1)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Popularity, SumsToOneAndFollowsRank) {
  for (double eta : {0.4, 0.8, 1.2}) {
    const auto m = build_popularity(200, 4, eta, 0.1, 3, 0.3);
    for (const auto& local : m.local) {
      EXPECT_NEAR(std::accumulate(local.begin(), local.end(), 0.0), 1.0, 1e-12);
    }
    EXPECT_NEAR(std::accumulate(m.global.begin(), m.global.end(), 0.0), 1.0, 1e-12);
  }
  const auto m = build_popularity(100, 3, 0.8, 0.1, 3, 0.0);
  for (const auto& local : m.local) {
    for (std::size_t f = 0; f < local.size(); ++f) EXPECT_NEAR(local[f], m.global[f], 1e-16);
    for (std::size_t f = 1; f < local.size(); ++f) EXPECT_LT(local[f], local[f - 1]);
  }
}

TEST(Popularity, EntropyFallsWithSkew) {
  const auto rank = Catalog::uniform(300).rank;
  double prev = std::log(300.0) + 1e-12;
  for (double eta : {0.0, 0.4, 0.8, 1.2, 1.6}) {
    const double h = entropy(mzipf(rank, eta, 0.1));
    EXPECT_LE(h, prev);
    prev = h;
  }
}

TEST(Popularity, ShuffleIsSeededPermutation) {
  const auto a = build_popularity(50, 3, 0.8, 0.1, 9, 0.5);
  const auto b = build_popularity(50, 3, 0.8, 0.1, 9, 0.5);
  EXPECT_EQ(a.local, b.local);
  for (const auto& local : a.local) {
    auto s1 = local, s2 = a.local.front();
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    for (std::size_t f = 0; f < s1.size(); ++f) EXPECT_NEAR(s1[f], s2[f], 1e-16);
  }
}

TEST(Popularity, SamplerFrequencies) {
  const std::vector<double> p{0.5, 0.3, 0.2};
  DiscreteSampler s(p);
  Rng rng(1);
  std::vector<int> c(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++c[s(rng)];
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c[i] / double(n), p[i], 4.0 * std::sqrt(p[i] * (1 - p[i]) / n));
}

TEST(Channel, NoiseDensity) {
  EXPECT_NEAR(noise_density_w_per_hz(-174.0), 3.9810717055349725e-21, 4e-35);  // argument rounding of -20.4
  EXPECT_NEAR(noise_density_w_per_hz(-30.0), 1e-6, 1e-20);
}

TEST(Channel, RateAndDelayMatchOracle) {
  DelayModel m;
  m.interference_w = {0.0, 0.01 * 9 * std::pow(150.0, -3.0)};
  const double h = channel_gain(100.0, 3.0);
  EXPECT_DOUBLE_EQ(h, 1e-6);
  // 20 MHz, 1 W, -174 dBm/Hz, d = 100 m; interference 0 and κ(N-1)P h(150 m), κ = 0.01, N = 10.
  EXPECT_NEAR(downlink_rate(m, h, 0), 471645360.3407185, 1e-4);
  EXPECT_NEAR(downlink_rate(m, h, 1), 105335646.89965697, 1e-5);
  EXPECT_NEAR(user_delay(downlink_rate(m, h, 1), 1.0), 0.075947698955329167, 1e-15);
  EXPECT_THROW(user_delay(0.0, 1.0), UnreachableUser);
}

TEST(Channel, InterferenceGrowsWithFaps) {
  DelayModel m;
  double prev = 1e300;
  for (std::size_t n : {1, 5, 10, 15, 20}) {
    m.interference_w = {interference_power(0.01, n, 1.0, channel_gain(150.0, 3.0))};
    const double r = downlink_rate(m, channel_gain(80.0, 3.0), 0);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_EQ(interference_power(0.01, 1, 1.0, 1.0), 0.0);
}

TEST(Channel, OneHot) {
  EXPECT_EQ(one_hot_index(std::vector<std::uint8_t>{0, 0, 1}), 2u);
  EXPECT_THROW(one_hot_index(std::vector<std::uint8_t>{1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(one_hot_index(std::vector<std::uint8_t>{0, 0}), std::invalid_argument);
}

namespace {

World small_world(std::size_t faps = 3, double capacity = 2.0) {
  WorldSpec s;
  s.num_contents = 10;
  s.num_faps = faps;
  s.users_per_fap = 4;
  s.num_rbs = 4;
  s.capacity_mb = capacity;
  return build_world(s, 42);
}

}  // namespace

TEST(World, DeterministicBuild) {
  const auto a = small_world(), b = small_world();
  EXPECT_EQ(a.user_rate_bps, b.user_rate_bps);
  for (std::size_t n = 0; n < a.num_faps(); ++n) {
    for (std::size_t u = 0; u < 4; ++u) {
      EXPECT_EQ(a.faps[n].users()[u].distance_m, b.faps[n].users()[u].distance_m);
      EXPECT_EQ(one_hot_index(a.faps[n].users()[u].rb), u % 4);
      EXPECT_GE(a.faps[n].users()[u].distance_m, 10.0);
      EXPECT_LE(a.faps[n].users()[u].distance_m, 150.0);
    }
  }
}

TEST(World, RoutingOrder) {
  auto w = small_world();
  const Catalog& c = w.catalog;
  RequestEvent e{0, 0, 1, 5};
  EXPECT_EQ(serve_request(w, e).route, Route::Cloud);
  apply_cache_update(w.faps[2], c, Route::Cloud, 5, std::nullopt);
  apply_cache_update(w.faps[1], c, Route::Cloud, 5, std::nullopt);
  auto out = serve_request(w, e);
  EXPECT_EQ(out.route, Route::Neighbor);
  EXPECT_EQ(out.source, 1u);  // lowest-id neighbor
  apply_cache_update(w.faps[0], c, Route::Cloud, 5, std::nullopt);
  out = serve_request(w, e);
  EXPECT_EQ(out.route, Route::Local);
  const double dc = 8e6 / w.user_rate_bps[0][1];
  EXPECT_NEAR(out.access_delay_s, dc, 1e-15);
  EXPECT_NEAR(out.delay_s, dc, 1e-15);
  EXPECT_NEAR(serve_request(w, {0, 0, 1, 6}).delay_s, dc + 0.010, 1e-15);
}

TEST(World, SnapshotHidesLaterInserts) {
  auto w = small_world();
  const auto snap = w.snapshot();
  apply_cache_update(w.faps[1], w.catalog, Route::Cloud, 3, std::nullopt);
  EXPECT_EQ(serve_request(w, {0, 0, 0, 3}, &snap).route, Route::Cloud);
  EXPECT_EQ(serve_request(w, {0, 0, 0, 3}).route, Route::Neighbor);
}

TEST(World, CacheUpdateRules) {
  auto w = small_world(1, 2.0);
  auto& fap = w.faps[0];
  const auto& c = w.catalog;
  EXPECT_THROW(apply_cache_update(fap, c, Route::Local, 1, std::nullopt), CacheError);
  apply_cache_update(fap, c, Route::Cloud, 4, std::nullopt);
  EXPECT_THROW(apply_cache_update(fap, c, Route::Cloud, 7, 4u), CacheError);  // free space left
  apply_cache_update(fap, c, Route::Cloud, 1, std::nullopt);
  EXPECT_EQ(fap.occupied(), 2u);
  apply_cache_update(fap, c, Route::Cloud, 9, std::nullopt);  // full: no-op
  EXPECT_FALSE(fap.contains(9));
  EXPECT_THROW(apply_cache_update(fap, c, Route::Cloud, 9, 3u), CacheError);
  apply_cache_update(fap, c, Route::Cloud, 9, 4u);
  EXPECT_EQ(std::vector<ContentId>(fap.slots().begin(), fap.slots().end()), (std::vector<ContentId>{1, 9}));
  EXPECT_LE(fap.used_mb(), fap.capacity_mb());
  w.check_capacity();
}

TEST(World, CapacityNeverExceededUnderRandomUpdates) {
  auto w = small_world(2, 3.0);
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    auto& fap = w.faps[rng.below(2)];
    const ContentId f = static_cast<ContentId>(rng.below(10));
    if (fap.contains(f)) continue;
    std::optional<ContentId> ev;
    if (fap.full_for(1.0) && rng.uniform() < 0.7) ev = fap.slots()[rng.below(fap.occupied())];
    apply_cache_update(fap, w.catalog, Route::Cloud, f, ev);
    ASSERT_LE(fap.occupied(), 3u);
    std::size_t bits = 0;
    for (auto p : fap.presence()) bits += p;
    ASSERT_EQ(bits, fap.occupied());
  }
  w.check_capacity();
}

TEST(Reward, ThreeCasesMatchOracle) {
  // d^c at 100 m in a ten-F-AP world, d_a = 2 ms, d_b = 10 ms, ζ = (0.1, 0.2, 0.7).
  const double dc = 0.075947698955329167;
  DelayModel m;
  m.interference_w = {0.0};
  const RewardWeights z;
  ServiceOutcome o;
  o.access_delay_s = dc;
  o.route = Route::Local;
  EXPECT_NEAR(request_reward(o, m, z), -0.0075947698955329167, 1e-15);
  o.route = Route::Neighbor;
  EXPECT_NEAR(request_reward(o, m, z), -0.02318430968659875, 1e-15);
  o.route = Route::Cloud;
  EXPECT_NEAR(request_reward(o, m, z), -0.067758159164263334, 1e-15);
}

TEST(Reward, LocalBeatsNeighborBeatsCloud) {
  DelayModel m;
  m.interference_w = {0.0};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    ServiceOutcome o;
    o.access_delay_s = rng.uniform(1e-3, 0.2);
    double r[3];
    for (int k = 0; k < 3; ++k) {
      o.route = static_cast<Route>(k);
      r[k] = request_reward(o, m, {});
    }
    EXPECT_GT(r[0], r[1]);
    EXPECT_GT(r[1], r[2]);
  }
}

TEST(Reward, WeightsValidated) {
  EXPECT_THROW((RewardWeights{0.5, 0.5, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((RewardWeights{-0.1, 0.4, 0.7}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((RewardWeights{0.1, 0.2, 0.7}.validate()));
}

TEST(Reward, SlotDelaysAddUp) {
  SlotDelays s;
  ServiceOutcome a{Route::Local, 0, 0.05, 0.05}, b{Route::Neighbor, 1, 0.04, 0.042},
      c{Route::Cloud, 0, 0.06, 0.07};
  s.add(a);
  s.add(a);
  s.add(b);
  s.add(c);
  EXPECT_EQ(s.requests(), 4u);
  EXPECT_EQ(s.count(Route::Local), 2u);
  const auto d = s.path_delays();
  EXPECT_NEAR(d.fog_user + d.fog_fog_user + d.cloud_fog_user, s.average_delay(), 1e-15);
  EXPECT_NEAR(s.average_delay(), (0.05 + 0.05 + 0.042 + 0.07) / 4, 1e-15);
  EXPECT_NEAR(s.reward({}), -(0.1 * 0.1 / 4 + 0.2 * 0.042 / 4 + 0.7 * 0.07 / 4), 1e-15);
}

TEST(Reward, ExpectedRewardRisesWhenCachingPopular) {
  auto w = small_world(2, 2.0);
  const double empty = expected_reward(w, 0, {});
  apply_cache_update(w.faps[0], w.catalog, Route::Cloud, 9, std::nullopt);
  const double unpopular = expected_reward(w, 0, {});
  apply_cache_update(w.faps[0], w.catalog, Route::Cloud, 0, std::nullopt);
  const double both = expected_reward(w, 0, {});
  EXPECT_GT(unpopular, empty);
  EXPECT_GT(both, unpopular);
  const auto d = expected_path_delays(w, 0);
  EXPECT_GT(d.cloud_fog_user, 0.0);
}
