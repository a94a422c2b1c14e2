#include "fogcache/agents/dqn.hpp"

#include <stdexcept>

namespace fogcache::agents {

Action epsilon_greedy(std::span<const double> q, std::size_t valid, double epsilon, Rng& rng) {
  if (valid == 0 || valid > q.size()) throw std::invalid_argument("epsilon-greedy: bad valid action count");
  if (epsilon > 0.0 && rng.uniform() < epsilon) return static_cast<Action>(rng.below(valid));
  std::size_t best = 0;
  for (std::size_t a = 1; a < valid; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<Action>(best);
}

DqnAgent::DqnAgent(neural::NetShape shape, DqnConfig config, std::uint64_t init_seed,
                   std::uint64_t stream_seed)
    : config_(config),
      pred_(std::move(shape), init_seed),
      target_(pred_),
      memory_(config.replay_capacity),
      explore_(derive_seed(stream_seed, stream::kAgent, 0)),
      sampler_(derive_seed(stream_seed, stream::kAgent, 1)) {
  if (config.batch_size == 0) throw std::invalid_argument("dqn: batch size must be positive");
  if (config.target_sync == 0) throw std::invalid_argument("dqn: target sync period must be positive");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("dqn: learning rate must be positive");
  if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw std::invalid_argument("dqn: gamma must lie in [0, 1)");
}

void DqnAgent::set_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  epsilon_ = epsilon;
}

Action DqnAgent::act(const Decision& d) {
  const std::size_t valid = valid_actions(d.fap);
  if (valid > pred_.num_actions()) throw std::out_of_range("dqn: cache has more slots than the action space");
  return epsilon_greedy(pred_.forward(d.state), valid, epsilon_, explore_);
}

Action DqnAgent::greedy(std::span<const double> state, std::size_t valid) const {
  Rng unused(0);
  return epsilon_greedy(pred_.forward(state), valid, 0.0, unused);
}

void DqnAgent::remember(neural::Experience e) { memory_.push(std::move(e)); }

void DqnAgent::observe(neural::Experience e) {
  remember(std::move(e));
  if (config_.train_on_observe) train_step();
}

std::optional<double> DqnAgent::train_step() {
  if (memory_.size() < config_.batch_size) return std::nullopt;
  const auto batch = memory_.sample(config_.batch_size, sampler_);
  auto result = neural::td_loss(pred_, target_, batch, config_.gamma);
  neural::sgd_step(pred_.params(), result.gradient, config_.learning_rate);
  ++steps_;
  neural::sync_target(pred_, target_, steps_, config_.target_sync);
  last_loss_ = result.loss;
  return result.loss;
}

void DqnAgent::load(const neural::LayeredParams& params) {
  pred_.params().require_conformable(params);
  pred_.params() = params;
}

class CentralizedAgent::Handle : public Policy {
 public:
  explicit Handle(DqnAgent& core) : core_(core) {}
  std::string_view name() const override { return "centralized"; }
  Action act(const Decision& d) override { return core_.act(d); }
  void observe(neural::Experience e) override { core_.observe(std::move(e)); }

 private:
  DqnAgent& core_;
};

CentralizedAgent::CentralizedAgent(std::size_t num_faps, neural::NetShape shape, DqnConfig config,
                                   std::uint64_t init_seed, std::uint64_t stream_seed)
    : core_(std::move(shape), config, init_seed, stream_seed) {
  if (num_faps == 0) throw std::invalid_argument("centralized agent needs at least one F-AP");
  for (std::size_t n = 0; n < num_faps; ++n) handles_.push_back(std::make_unique<Handle>(core_));
}

}  // namespace fogcache::agents
