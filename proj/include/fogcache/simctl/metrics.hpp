#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fogcache/env/world.hpp"

namespace fogcache::simctl {

/// Fraction of requests served from the F-AP's own cache; nothing when the
/// F-AP had no requests.
std::optional<double> hit_rate(std::span<const env::Route> routes);

/// Mean request delay; throws std::invalid_argument on empty input.
double avg_request_delay(std::span<const env::ServiceOutcome> outcomes);

/// One slot of network-wide metrics.
struct SlotMetrics {
  std::size_t slot = 0;
  std::vector<double> hit_rate;  // per F-AP, NaN for an F-AP without requests
  double mean_hit_rate = 0.0;    // over F-APs with requests
  double avg_delay = 0.0;        // over all requests
  std::size_t local = 0;
  std::size_t neighbor = 0;
  std::size_t cloud = 0;
  double reward = 0.0;           // slot reward over all requests
  double cumulative_reward = 0.0;
  double epsilon = 0.0;
  double uploaded_ratio = 0.0;   // cumulative; NaN when not federated
};

/// Post-warm-up averages.
struct Summary {
  std::size_t slots_measured = 0;
  double hit_rate = 0.0;
  double avg_delay = 0.0;
  double local_fraction = 0.0;
  double neighbor_fraction = 0.0;
  double cloud_fraction = 0.0;
  double cumulative_reward = 0.0;
};

Summary summarize(std::span<const SlotMetrics> slots, std::size_t warmup);

}  // namespace fogcache::simctl
