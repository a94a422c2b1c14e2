#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fogcache/agents/policy.hpp"
#include "fogcache/neural/dueling_net.hpp"
#include "fogcache/neural/replay.hpp"
#include "fogcache/rng.hpp"

namespace fogcache::agents {

struct DqnConfig {
  double gamma = 0.9;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 10000;
  std::uint64_t target_sync = 100;  // M, in training steps
  /// When true, observe() also runs one training step once the memory holds
  /// a full batch. The simulator turns this off and schedules steps itself.
  bool train_on_observe = true;
};

/// Epsilon-greedy choice over the first `valid` entries of q: with
/// probability epsilon a uniform valid action, otherwise the argmax with ties
/// to the lowest index.
Action epsilon_greedy(std::span<const double> q, std::size_t valid, double epsilon, Rng& rng);

/// Dueling-DQN cache-replacement agent.
class DqnAgent : public Policy {
 public:
  /// `init_seed` fixes the network initialization, `stream_seed` the
  /// exploration and replay-sampling randomness.
  DqnAgent(neural::NetShape shape, DqnConfig config, std::uint64_t init_seed,
           std::uint64_t stream_seed);

  std::string_view name() const override { return "dqn"; }
  Action act(const Decision& d) override;
  /// Stores the experience; trains once when train_on_observe is set and
  /// the memory holds at least one batch.
  void observe(neural::Experience e) override;

  /// Greedy action over the first `valid` actions, ties to the lowest index.
  Action greedy(std::span<const double> state, std::size_t valid) const;

  void remember(neural::Experience e);
  /// One mini-batch SGD step on the TD loss followed by the target-sync
  /// check. Returns the loss, or nothing while the memory holds less than a
  /// batch.
  std::optional<double> train_step();

  /// Replaces the prediction network's parameters (federated broadcast).
  void load(const neural::LayeredParams& params);

  void set_epsilon(double epsilon);
  double epsilon() const { return epsilon_; }

  const neural::DuelingNet& net() const { return pred_; }
  const neural::DuelingNet& target() const { return target_; }
  const neural::ReplayMemory& memory() const { return memory_; }
  const DqnConfig& config() const { return config_; }
  std::uint64_t train_steps() const { return steps_; }
  std::optional<double> last_loss() const { return last_loss_; }

 private:
  DqnConfig config_;
  neural::DuelingNet pred_;
  neural::DuelingNet target_;
  neural::ReplayMemory memory_;
  Rng explore_;
  Rng sampler_;
  double epsilon_ = 1.0;
  std::uint64_t steps_ = 0;
  std::optional<double> last_loss_;
};

/// One network shared by every F-AP, trained on their interleaved experience.
class CentralizedAgent {
 public:
  CentralizedAgent(std::size_t num_faps, neural::NetShape shape, DqnConfig config,
                   std::uint64_t init_seed, std::uint64_t stream_seed);

  /// Policy handle for F-AP n; actions come from the shared network and
  /// experiences go to the shared memory.
  Policy& handle(std::size_t n) { return *handles_.at(n); }
  DqnAgent& core() { return core_; }
  const DqnAgent& core() const { return core_; }
  std::size_t num_faps() const { return handles_.size(); }

 private:
  class Handle;
  DqnAgent core_;
  std::vector<std::unique_ptr<Policy>> handles_;
};

}  // namespace fogcache::agents
