#include "fogcache/env/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace fogcache::env {

void RewardWeights::validate() const {
  if (!(local >= 0.0) || !(neighbor >= 0.0) || !(cloud >= 0.0)) {
    throw std::invalid_argument("reward weights must be non-negative");
  }
  if (std::abs(local + neighbor + cloud - 1.0) > 1e-9) {
    throw std::invalid_argument("reward weights must sum to 1");
  }
}

double reward(Route route, const PathDelays& delays, const RewardWeights& weights) {
  switch (route) {
    case Route::Local: return -weights.local * delays.fog_user;
    case Route::Neighbor:
      return -(weights.neighbor * delays.fog_fog_user + weights.local * delays.fog_user);
    case Route::Cloud:
      return -(weights.cloud * delays.cloud_fog_user + weights.local * delays.fog_user);
  }
  throw std::invalid_argument("reward: unknown route");
}

PathDelays request_path_delays(const ServiceOutcome& outcome, const DelayModel& delay) {
  return {outcome.access_delay_s, outcome.access_delay_s + delay.fap_to_fap_delay_s,
          outcome.access_delay_s + delay.cloud_to_fap_delay_s};
}

double request_reward(const ServiceOutcome& outcome, const DelayModel& delay,
                      const RewardWeights& weights) {
  return reward(outcome.route, request_path_delays(outcome, delay), weights);
}

void SlotDelays::add(const ServiceOutcome& outcome) {
  const auto r = static_cast<std::size_t>(outcome.route);
  ++count_[r];
  sum_[r] += outcome.delay_s;
}

PathDelays SlotDelays::path_delays() const {
  const std::size_t n = requests();
  if (n == 0) return {};
  const double inv = 1.0 / static_cast<double>(n);
  return {sum_[0] * inv, sum_[1] * inv, sum_[2] * inv};
}

double SlotDelays::average_delay() const {
  const auto d = path_delays();
  return d.fog_user + d.fog_fog_user + d.cloud_fog_user;
}

double SlotDelays::reward(const RewardWeights& weights) const {
  const auto d = path_delays();
  return -(weights.local * d.fog_user + weights.neighbor * d.fog_fog_user +
           weights.cloud * d.cloud_fog_user);
}

PathDelays expected_path_delays(const World& world, FapId fap, const CacheSnapshot* neighbors) {
  const auto& state = world.faps.at(fap);
  const auto& rates = world.user_rate_bps.at(fap);
  double inv_rate = 0.0;
  for (const double r : rates) inv_rate += user_delay(r, 1.0);
  inv_rate /= static_cast<double>(rates.size());  // mean seconds per megabyte

  const auto& p = world.popularity.local.at(fap);
  PathDelays out;
  for (ContentId f = 0; f < world.num_contents(); ++f) {
    const double dc = inv_rate * world.catalog.size_mb[f];
    if (state.contains(f)) {
      out.fog_user += p[f] * dc;
      continue;
    }
    bool elsewhere = false;
    for (std::size_t l = 0; l < world.faps.size() && !elsewhere; ++l) {
      if (l == fap) continue;
      elsewhere = neighbors ? (*neighbors)[l][f] != 0 : world.faps[l].contains(f);
    }
    if (elsewhere) {
      out.fog_fog_user += p[f] * (dc + world.delay.fap_to_fap_delay_s);
    } else {
      out.cloud_fog_user += p[f] * (dc + world.delay.cloud_to_fap_delay_s);
    }
  }
  return out;
}

double expected_reward(const World& world, FapId fap, const RewardWeights& weights,
                       const CacheSnapshot* neighbors) {
  const auto d = expected_path_delays(world, fap, neighbors);
  return -(weights.local * d.fog_user + weights.neighbor * d.fog_fog_user +
           weights.cloud * d.cloud_fog_user);
}

}  // namespace fogcache::env
