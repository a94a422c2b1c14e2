#include "fogcache/simctl/metrics.hpp"

#include <stdexcept>

namespace fogcache::simctl {

std::optional<double> hit_rate(std::span<const env::Route> routes) {
  if (routes.empty()) return std::nullopt;
  std::size_t local = 0;
  for (const auto r : routes) local += r == env::Route::Local;
  return static_cast<double>(local) / static_cast<double>(routes.size());
}

double avg_request_delay(std::span<const env::ServiceOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("average delay of an empty slot");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += o.delay_s;
  return sum / static_cast<double>(outcomes.size());
}

Summary summarize(std::span<const SlotMetrics> slots, std::size_t warmup) {
  Summary s;
  std::size_t requests = 0, local = 0, neighbor = 0, cloud = 0;
  for (const auto& m : slots) {
    if (m.slot < warmup) continue;
    ++s.slots_measured;
    s.hit_rate += m.mean_hit_rate;
    s.avg_delay += m.avg_delay;
    local += m.local;
    neighbor += m.neighbor;
    cloud += m.cloud;
  }
  if (s.slots_measured) {
    s.hit_rate /= static_cast<double>(s.slots_measured);
    s.avg_delay /= static_cast<double>(s.slots_measured);
  }
  requests = local + neighbor + cloud;
  if (requests) {
    s.local_fraction = static_cast<double>(local) / static_cast<double>(requests);
    s.neighbor_fraction = static_cast<double>(neighbor) / static_cast<double>(requests);
    s.cloud_fraction = static_cast<double>(cloud) / static_cast<double>(requests);
  }
  if (!slots.empty()) s.cumulative_reward = slots.back().cumulative_reward;
  return s;
}

}  // namespace fogcache::simctl
