#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fogcache::env {

class FapState;

/// Thrown when a user's downlink rate is zero, so no delay exists.
class UnreachableUser : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bits per megabyte used throughout (decimal megabytes).
inline constexpr double kBitsPerMegabyte = 8.0e6;

/// -174 dBm/Hz expressed in W/Hz.
double noise_density_w_per_hz(double dbm_per_hz = -174.0);

/// Radio and backhaul parameters for the delay model.
struct DelayModel {
  double rb_bandwidth_hz = 20.0e6;
  double transmit_power_w = 1.0;
  double noise_density_w_per_hz = 3.981071705534972e-21;  // -174 dBm/Hz
  std::vector<double> interference_w;  // I_m, one entry per resource block
  double fap_to_fap_delay_s = 0.002;
  double cloud_to_fap_delay_s = 0.010;
  double pathloss_exponent = 3.0;

  std::size_t num_rbs() const { return interference_w.size(); }
  void validate() const;
};

/// Deterministic path-loss gain distance^-exponent.
double channel_gain(double distance_m, double pathloss_exponent);

/// Per-RB interference from the other F-APs reusing the band:
/// factor * (num_faps - 1) * power * reference_gain.
double interference_power(double factor, std::size_t num_faps, double transmit_power_w,
                          double reference_gain);

/// B * log2(1 + P h / (I_m + B N0)) for an explicit gain and RB index.
double downlink_rate(const DelayModel& model, double gain, std::size_t rb);

/// Rate for one of the F-AP's users; throws std::invalid_argument when the
/// user's RB vector is not one-hot.
double downlink_rate(const DelayModel& model, const FapState& fap, std::size_t user);

/// Seconds to push `size_mb` at `rate_bps`; throws UnreachableUser for a zero rate.
double user_delay(double rate_bps, double size_mb);

/// Position of the single 1 in a one-hot vector; throws std::invalid_argument otherwise.
std::size_t one_hot_index(std::span<const std::uint8_t> assignment);

}  // namespace fogcache::env
