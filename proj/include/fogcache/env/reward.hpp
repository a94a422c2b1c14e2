#pragma once

#include <cstddef>

#include "fogcache/env/world.hpp"

namespace fogcache::env {

/// Weights on the three delivery paths; must lie on the probability simplex.
struct RewardWeights {
  double local = 0.1;     // zeta_1, F-AP to user
  double neighbor = 0.2;  // zeta_2, neighbor F-AP to F-AP to user
  double cloud = 0.7;     // zeta_3, cloud to F-AP to user

  /// Throws std::invalid_argument on negative weights or a sum away from 1.
  void validate() const;
};

/// The three path delay terms D^{F-U}, D^{F-F-U} and D^{C-F-U} in seconds.
struct PathDelays {
  double fog_user = 0.0;
  double fog_fog_user = 0.0;
  double cloud_fog_user = 0.0;
};

/// Piecewise reward: -z1 D^{F-U} for local service, -(z2 D^{F-F-U} + z1 D^{F-U})
/// for neighbor service and -(z3 D^{C-F-U} + z1 D^{F-U}) for cloud service.
double reward(Route route, const PathDelays& delays, const RewardWeights& weights);

/// Path delays of a single request: its access delay d^c, d^c + d^a and d^c + d^b.
PathDelays request_path_delays(const ServiceOutcome& outcome, const DelayModel& delay);

/// reward() evaluated on a single request's own path delays.
double request_reward(const ServiceOutcome& outcome, const DelayModel& delay,
                      const RewardWeights& weights);

/// Accumulates one slot's served requests into realized path delays.
///
/// Each D-term is the sum of the delays of the requests served over that path
/// divided by the total number of requests, so the three terms add up to the
/// slot's average request delay.
class SlotDelays {
 public:
  void add(const ServiceOutcome& outcome);

  std::size_t requests() const { return count_[0] + count_[1] + count_[2]; }
  std::size_t count(Route r) const { return count_[static_cast<std::size_t>(r)]; }
  PathDelays path_delays() const;
  double average_delay() const;

  /// -(z1 D^{F-U} + z2 D^{F-F-U} + z3 D^{C-F-U}).
  double reward(const RewardWeights& weights) const;

 private:
  std::size_t count_[3] = {0, 0, 0};
  double sum_[3] = {0.0, 0.0, 0.0};
};

/// Popularity-weighted path delays of one F-AP's current cache configuration:
/// every content f contributes p_{n,f} times its route delay, with d^c
/// averaged over the F-AP's users. Neighbor caches come from `neighbors` when
/// given, otherwise from the live world.
PathDelays expected_path_delays(const World& world, FapId fap,
                                const CacheSnapshot* neighbors = nullptr);

/// -(z1 D^{F-U} + z2 D^{F-F-U} + z3 D^{C-F-U}) on expected_path_delays.
double expected_reward(const World& world, FapId fap, const RewardWeights& weights,
                       const CacheSnapshot* neighbors = nullptr);

}  // namespace fogcache::env
