#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fogcache/agents/dqn.hpp"
#include "fogcache/agents/policy.hpp"
#include "fogcache/env/popularity.hpp"
#include "fogcache/env/reward.hpp"
#include "fogcache/env/world.hpp"
#include "fogcache/federation/federation.hpp"
#include "fogcache/simctl/config.hpp"
#include "fogcache/simctl/metrics.hpp"

namespace fogcache::simctl {

/// One served request, for trajectory comparisons.
struct TraceEvent {
  std::uint64_t slot = 0;
  std::uint32_t fap = 0;
  std::uint32_t user = 0;
  std::uint32_t content = 0;
  env::Route route = env::Route::Cloud;
  std::int64_t action = -1;  // -1 when no decision was taken
  double reward = 0.0;       // per-request reward

  bool operator==(const TraceEvent&) const = default;
};

struct RunResult {
  std::vector<SlotMetrics> slots;
  std::vector<federation::RoundRecord> rounds;
  std::vector<double> period_hit_rate;  // federated runs only
  std::vector<double> losses;           // training losses of F-AP 0's learner, in step order
  std::vector<TraceEvent> trace;        // filled when requested
  Summary summary;
  std::optional<double> uploaded_ratio;
  std::uint64_t decisions = 0;
  std::uint64_t model_checksum = 0;     // final model of F-AP 0's learner; 0 for heuristics
};

/// Discrete-time simulator: every slot, each user of each F-AP requests one
/// content drawn from its F-AP's popularity. Requests are routed local,
/// then neighbor (from the slot-start snapshot), then cloud; cloud-served
/// requests insert into a non-full cache directly and otherwise ask the
/// F-AP's policy for a replacement action.
///
/// The request trace depends only on the seed and the popularity model, so
/// different policies see identical requests.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg, bool record_trace = false);
  ~Simulator();

  /// Runs all slots with the configured policy and training schedule.
  RunResult run();

  const env::World& world() const { return world_; }
  const SimConfig& config() const { return cfg_; }

 private:
  struct Pending;
  class AgentClient;

  void run_slot();
  void advance_to(std::size_t slot_exclusive);
  std::size_t updates_after_slot(std::size_t t) const;
  std::size_t update_slot(std::size_t period, std::size_t update) const;
  agents::Policy& policy(std::size_t n);
  void train_tick(std::size_t steps);
  double epsilon_at(std::size_t t) const;
  void record_loss(std::optional<double> loss);

  SimConfig cfg_;
  bool record_trace_;
  env::World world_;
  agents::StateEncoder encoder_;
  std::vector<env::DiscreteSampler> samplers_;
  std::vector<Rng> request_rng_;
  std::vector<std::unique_ptr<agents::Policy>> policies_;
  std::vector<agents::DqnAgent*> dqn_;  // learners owned by policies_ (dqn and federated modes)
  std::unique_ptr<agents::CentralizedAgent> central_;
  std::vector<Pending> pending_;
  std::size_t slot_ = 0;
  std::size_t period_len_ = 0;
  double uploaded_bits_ = 0.0;
  double raw_bits_ = 0.0;
  RunResult result_;
};

RunResult run_simulation(const SimConfig& cfg, bool record_trace = false);

}  // namespace fogcache::simctl
