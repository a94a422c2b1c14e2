#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fogcache/neural/params.hpp"

namespace fogcache::neural {

/// One replay record. `next_state` is the state at the agent's next decision.
struct Experience {
  std::vector<double> state;
  std::uint32_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
};

/// Shape of a dueling network.
struct NetShape {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{128, 128};
  std::size_t num_actions = 0;

  bool operator==(const NetShape&) const = default;
};

/// Activations kept by a batched forward pass for backpropagation.
struct ForwardTape {
  std::size_t batch = 0;
  std::vector<double> input;
  std::vector<std::vector<double>> hidden;  // post-ReLU, one per trunk layer
  std::vector<double> value;                // [batch]
  std::vector<double> advantage;            // [batch][num_actions]
};

/// Dense ReLU trunk with a linear value head and a linear advantage head,
/// merged as Q = V + A - mean(A).
///
/// Parameter layers are ordered trunk..., value head, advantage head.
class DuelingNet {
 public:
  DuelingNet() = default;
  /// Uniform initialization in +-1/sqrt(fan_in), seeded.
  DuelingNet(NetShape shape, std::uint64_t seed);
  /// Wraps existing parameters; throws ShapeError if they do not fit `shape`.
  DuelingNet(NetShape shape, LayeredParams params);

  const NetShape& shape() const { return shape_; }
  std::size_t num_actions() const { return shape_.num_actions; }
  std::size_t input_dim() const { return shape_.input_dim; }

  LayeredParams& params() { return params_; }
  const LayeredParams& params() const { return params_; }

  /// Q-values of one state.
  std::vector<double> forward(std::span<const double> state) const;

  /// Q-values of `batch` row-major states into q [batch][num_actions]. Records
  /// activations when `tape` is given.
  void forward_batch(std::span<const double> states, std::size_t batch, std::span<double> q,
                     ForwardTape* tape = nullptr) const;

  /// Accumulates d(sum_b sum_a grad_q[b][a] * Q[b][a]) / d(params) into `grad`.
  void backward(const ForwardTape& tape, std::span<const double> grad_q,
                LayeredParams& grad) const;

  /// Q = V + A - mean(A) for one row.
  static void merge(double value, std::span<const double> advantage, std::span<double> q);

 private:
  std::size_t value_layer() const { return shape_.hidden.size(); }
  std::size_t advantage_layer() const { return shape_.hidden.size() + 1; }
  void check_params() const;

  NetShape shape_;
  LayeredParams params_;
};

struct LossResult {
  double loss = 0.0;
  LayeredParams gradient;
};

/// Mean squared TD error over the batch against targets
/// r + gamma * max_a' Q_target(s', a'); the gradient is with respect to the
/// prediction network only.
LossResult td_loss(const DuelingNet& pred, const DuelingNet& target,
                   std::span<const Experience* const> batch, double gamma);

/// Copies pred into target when step is a multiple of period.
void sync_target(const DuelingNet& pred, DuelingNet& target, std::uint64_t step,
                 std::uint64_t period);

}  // namespace fogcache::neural
