#include "fogcache/env/channel.hpp"

#include <cmath>

#include "fogcache/env/world.hpp"

namespace fogcache::env {

double noise_density_w_per_hz(double dbm_per_hz) { return std::pow(10.0, dbm_per_hz / 10.0 - 3.0); }

void DelayModel::validate() const {
  if (!(rb_bandwidth_hz > 0.0)) throw std::invalid_argument("delay model: bandwidth must be positive");
  if (!(transmit_power_w > 0.0)) throw std::invalid_argument("delay model: power must be positive");
  if (!(noise_density_w_per_hz > 0.0)) throw std::invalid_argument("delay model: noise density must be positive");
  if (!(fap_to_fap_delay_s > 0.0) || !(cloud_to_fap_delay_s > 0.0)) {
    throw std::invalid_argument("delay model: backhaul delays must be positive");
  }
  if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("delay model: path-loss exponent must be positive");
  if (interference_w.empty()) throw std::invalid_argument("delay model: no resource blocks");
  for (const double i : interference_w) {
    if (!(i >= 0.0)) throw std::invalid_argument("delay model: interference must be non-negative");
  }
}

double channel_gain(double distance_m, double pathloss_exponent) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("channel gain: distance must be positive");
  return std::pow(distance_m, -pathloss_exponent);
}

double interference_power(double factor, std::size_t num_faps, double transmit_power_w,
                          double reference_gain) {
  if (num_faps == 0) return 0.0;
  return factor * static_cast<double>(num_faps - 1) * transmit_power_w * reference_gain;
}

double downlink_rate(const DelayModel& model, double gain, std::size_t rb) {
  const double sinr = model.transmit_power_w * gain /
                      (model.interference_w.at(rb) + model.rb_bandwidth_hz * model.noise_density_w_per_hz);
  return model.rb_bandwidth_hz * std::log2(1.0 + sinr);
}

double downlink_rate(const DelayModel& model, const FapState& fap, std::size_t user) {
  const auto& link = fap.users().at(user);
  if (link.rb.size() != model.num_rbs()) {
    throw std::invalid_argument("downlink rate: RB vector length does not match the number of RBs");
  }
  const std::size_t rb = one_hot_index(link.rb);
  return downlink_rate(model, channel_gain(link.distance_m, model.pathloss_exponent), rb);
}

double user_delay(double rate_bps, double size_mb) {
  if (!(rate_bps > 0.0)) throw UnreachableUser("user delay: zero downlink rate");
  return size_mb * kBitsPerMegabyte / rate_bps;
}

std::size_t one_hot_index(std::span<const std::uint8_t> assignment) {
  std::size_t index = assignment.size();
  for (std::size_t m = 0; m < assignment.size(); ++m) {
    if (assignment[m] > 1) throw std::invalid_argument("RB vector entries must be 0 or 1");
    if (assignment[m] == 1) {
      if (index != assignment.size()) throw std::invalid_argument("RB vector has more than one entry set");
      index = m;
    }
  }
  if (index == assignment.size()) throw std::invalid_argument("RB vector has no entry set");
  return index;
}

}  // namespace fogcache::env
