#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fogcache/fedcompress/update.hpp"
#include "fogcache/neural/params.hpp"

namespace fogcache::federation {

/// The part of a learner the server may touch. Experiences never cross this
/// boundary; only parameters and a dataset size do.
class FedClient {
 public:
  virtual ~FedClient() = default;
  /// Overwrites the local model with the broadcast global model.
  virtual void load(const neural::LayeredParams& global) = 0;
  /// One local SGD step; returns its loss, or nothing if the client could not
  /// train (e.g. not enough data yet).
  virtual std::optional<double> local_step() = 0;
  virtual const neural::LayeredParams& params() const = 0;
  /// D_n, the local dataset size used as aggregation weight.
  virtual double dataset_size() const = 0;
};

/// Step size b / (t + a).
struct StepSchedule {
  double b = 1.0;
  double a = 0.0;

  double operator()(std::size_t t) const { return b / (static_cast<double>(t) + a); }
};

struct FedConfig {
  std::size_t periods = 50;       // Y
  std::size_t local_updates = 20; // X
  StepSchedule schedule;          // used by the convex testbed
  bool quantize = true;           // false: upload exact deltas
  fedcompress::CompressOptions compression{0.9, 32, 32, true, 300};
  bool equal_weights = false;     // ignore D_n

  void validate() const;
};

struct ClientRecord {
  std::size_t client = 0;
  double dataset_size = 0.0;
  std::uint64_t bit_cost = 0;
  std::uint64_t payload_bits = 0;
  std::uint64_t raw_bits = 0;
  std::size_t kept_layers = 0;
  std::size_t steps = 0;        // local steps that trained
  double mean_loss = 0.0;       // NaN when no step trained
};

struct RoundRecord {
  std::size_t period = 0;
  std::vector<ClientRecord> clients;
  std::uint64_t checksum = 0;   // of the new global model
  double mean_loss = 0.0;       // over clients that trained; NaN if none
  double ratio = 0.0;           // sum bit_cost / sum raw_bits this period
  double update_norm = 0.0;     // ||theta_{y+1} - theta_y||, the convergence proxy
};

/// Called before local update i of a period; the simulator advances the
/// environment here.
using UpdateHook = std::function<void(std::size_t update)>;

/// One period: broadcast, X local updates per client, compression, upload
/// and theta_{y+1} = theta_y + (1 / sum D) * sum D_n decode(Q(delta_n)).
/// Clients step in parallel between hook calls.
RoundRecord run_period(neural::LayeredParams& global, std::span<FedClient* const> clients,
                       const FedConfig& cfg, std::size_t period = 0, const UpdateHook& hook = {});

/// Server step alone: theta + weighted mean of the given deltas. With all
/// weights zero the model is returned unchanged.
neural::LayeredParams aggregate(const neural::LayeredParams& global,
                                std::span<const neural::LayeredParams> deltas,
                                std::span<const double> weights);

/// Y periods. The hook receives (period, update).
std::vector<RoundRecord> run_training(neural::LayeredParams& global,
                                      std::span<FedClient* const> clients, const FedConfig& cfg,
                                      const std::function<void(std::size_t, std::size_t)>& hook = {});

/// Cumulative sum bit_cost / sum raw_bits over all records and clients.
/// Throws std::invalid_argument on empty input.
double uploaded_ratio(std::span<const RoundRecord> records);

/// Appends one CSV row per client per period (see config/csv_schema.json).
void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> records,
                      std::span<const double> hit_rate_by_period = {});

}  // namespace fogcache::federation
