#include "fogcache/simctl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogcache::simctl {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

struct Simulator::Pending {
  bool active = false;
  std::vector<double> state;
  agents::Action action = 0;
  double reward_sum = 0.0;
  std::size_t requests = 0;
  double fixed_reward = 0.0;  // expected and gain modes
};

class Simulator::AgentClient : public federation::FedClient {
 public:
  AgentClient(agents::DqnAgent& agent, Simulator* owner) : agent_(agent), owner_(owner) {}
  void load(const neural::LayeredParams& global) override { agent_.load(global); }
  std::optional<double> local_step() override {
    auto loss = agent_.train_step();
    if (owner_) owner_->record_loss(loss);
    return loss;
  }
  const neural::LayeredParams& params() const override { return agent_.net().params(); }
  double dataset_size() const override { return static_cast<double>(agent_.memory().size()); }

 private:
  agents::DqnAgent& agent_;
  Simulator* owner_;
};

Simulator::Simulator(SimConfig cfg, bool record_trace)
    : cfg_(std::move(cfg)),
      record_trace_(record_trace),
      world_(env::build_world((cfg_.validate(), cfg_.world_spec()), cfg_.seed)),
      encoder_(cfg_.content.num_contents, cfg_.network.num_rbs) {
  const std::size_t N = world_.num_faps();
  for (std::size_t n = 0; n < N; ++n) {
    samplers_.emplace_back(world_.popularity.local[n]);
    request_rng_.emplace_back(derive_seed(cfg_.seed, stream::kRequests, n));
  }
  pending_.resize(N);
  period_len_ = cfg_.run.slots / cfg_.federation.periods;

  const auto& L = cfg_.learning;
  neural::NetShape shape{encoder_.dim(), L.hidden_layers, cfg_.cache_slots() + 1};
  agents::DqnConfig dc;
  dc.gamma = L.discount;
  dc.learning_rate = L.learning_rate;
  dc.batch_size = L.batch_size;
  dc.replay_capacity = L.replay_capacity;
  dc.target_sync = L.target_sync;
  dc.train_on_observe = false;
  const auto init_seed = derive_seed(cfg_.seed, stream::kInit, 0);

  switch (cfg_.policy) {
    case PolicyKind::Lru:
      for (std::size_t n = 0; n < N; ++n) policies_.push_back(std::make_unique<agents::LruPolicy>(cfg_.content.num_contents));
      break;
    case PolicyKind::Lfu:
      for (std::size_t n = 0; n < N; ++n) policies_.push_back(std::make_unique<agents::LfuPolicy>(cfg_.content.num_contents));
      break;
    case PolicyKind::Centralized:
      central_ = std::make_unique<agents::CentralizedAgent>(N, shape, dc, init_seed,
                                                            derive_seed(cfg_.seed, stream::kAgent, 0));
      break;
    case PolicyKind::Dqn:
    case PolicyKind::Frl:
    case PolicyKind::Frlq:
      for (std::size_t n = 0; n < N; ++n) {
        auto agent = std::make_unique<agents::DqnAgent>(shape, dc, init_seed,
                                                        derive_seed(cfg_.seed, stream::kAgent, n));
        dqn_.push_back(agent.get());
        policies_.push_back(std::move(agent));
      }
      break;
  }
}

Simulator::~Simulator() = default;

agents::Policy& Simulator::policy(std::size_t n) {
  return central_ ? central_->handle(n) : *policies_[n];
}

double Simulator::epsilon_at(std::size_t t) const {
  const auto& L = cfg_.learning;
  const double span = L.epsilon_decay_fraction * static_cast<double>(cfg_.run.slots);
  if (span <= 0.0 || static_cast<double>(t) >= span) return L.epsilon_end;
  return L.epsilon_start + (L.epsilon_end - L.epsilon_start) * static_cast<double>(t) / span;
}

void Simulator::record_loss(std::optional<double> loss) {
  if (loss) result_.losses.push_back(*loss);
}

std::size_t Simulator::update_slot(std::size_t period, std::size_t update) const {
  const std::size_t X = cfg_.federation.local_updates;
  const std::size_t offset = (update + 1) * period_len_ / X;
  return period * period_len_ + (offset == 0 ? 0 : offset - 1);
}

std::size_t Simulator::updates_after_slot(std::size_t t) const {
  if (period_len_ == 0 || t >= cfg_.federation.periods * period_len_) return 0;
  const std::size_t y = t / period_len_;
  std::size_t count = 0;
  for (std::size_t i = 0; i < cfg_.federation.local_updates; ++i) count += update_slot(y, i) == t;
  return count;
}

void Simulator::train_tick(std::size_t steps) {
  if (steps == 0) return;
  if (central_) {
    for (std::size_t s = 0; s < steps * world_.num_faps(); ++s) {
      const auto loss = central_->core().train_step();
      if (loss) result_.losses.push_back(*loss);
    }
    return;
  }
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t n = 0; n < dqn_.size(); ++n) {
      const auto loss = dqn_[n]->train_step();
      if (n == 0 && loss) result_.losses.push_back(*loss);
    }
  }
}

void Simulator::run_slot() {
  const std::size_t t = slot_;
  const double eps = epsilon_at(t);
  for (auto* a : dqn_) a->set_epsilon(eps);
  if (central_) central_->core().set_epsilon(eps);

  const bool learning = is_learning(cfg_.policy);
  const auto snapshot = world_.snapshot();
  const auto& weights = cfg_.reward.weights;
  const std::size_t N = world_.num_faps();

  SlotMetrics m;
  m.slot = t;
  m.epsilon = learning ? eps : kNaN;
  m.hit_rate.assign(N, kNaN);
  env::SlotDelays delays;
  std::vector<env::Route> routes;
  double hit_sum = 0.0;
  std::size_t hit_n = 0;

  for (std::size_t n = 0; n < N; ++n) {
    auto& fap = world_.faps[n];
    auto& pend = pending_[n];
    auto& pol = policy(n);
    routes.clear();
    for (std::uint32_t u = 0; u < fap.num_users(); ++u) {
      const auto f = static_cast<env::ContentId>(samplers_[n](request_rng_[n]));
      const env::RequestEvent ev{t, static_cast<env::FapId>(n), u, f};
      const auto out = env::serve_request(world_, ev, &snapshot);
      pol.on_request(f);
      delays.add(out);
      routes.push_back(out.route);
      const double r = env::request_reward(out, world_.delay, weights);
      pend.reward_sum += r;
      ++pend.requests;

      std::int64_t action = -1;
      if (out.route == env::Route::Cloud) {
        const double size = world_.catalog.size_mb[f];
        if (!fap.full_for(size)) {
          env::apply_cache_update(fap, world_.catalog, env::Route::Cloud, f, std::nullopt);
        } else if (fap.occupied() > 0) {
          std::vector<double> state;
          if (learning) {
            state = encoder_.encode(fap, f, env::one_hot_index(fap.users()[u].rb));
            if (pend.active) {
              const double reward = cfg_.reward.mode == RewardMode::Realized
                                        ? pend.reward_sum / static_cast<double>(pend.requests)
                                        : pend.fixed_reward;
              pol.observe({std::move(pend.state), pend.action, cfg_.reward.scale * reward, state});
            }
          }
          const double before = cfg_.reward.mode == RewardMode::Gain
                                    ? env::expected_reward(world_, static_cast<env::FapId>(n), weights, &snapshot)
                                    : 0.0;
          const agents::Action a = pol.act({fap, f, state});
          env::apply_cache_update(fap, world_.catalog, env::Route::Cloud, f,
                                  agents::evicted_content(fap, a));
          action = a;
          ++result_.decisions;
          if (learning) {
            pend.active = true;
            pend.state = std::move(state);
            pend.action = a;
            pend.reward_sum = 0.0;
            pend.requests = 0;
            if (cfg_.reward.mode != RewardMode::Realized) {
              pend.fixed_reward =
                  env::expected_reward(world_, static_cast<env::FapId>(n), weights, &snapshot) - before;
            }
          }
        }
        if (fap.used_mb() > fap.capacity_mb() + 1e-9) {
          throw env::CacheError("capacity exceeded at F-AP " + std::to_string(n));
        }
      }
      if (record_trace_) {
        result_.trace.push_back({t, static_cast<std::uint32_t>(n), u, f, out.route, action, r});
      }
    }
    if (const auto h = hit_rate(routes)) {
      m.hit_rate[n] = *h;
      hit_sum += *h;
      ++hit_n;
    }
  }

  m.mean_hit_rate = hit_n ? hit_sum / static_cast<double>(hit_n) : kNaN;
  m.local = delays.count(env::Route::Local);
  m.neighbor = delays.count(env::Route::Neighbor);
  m.cloud = delays.count(env::Route::Cloud);
  m.avg_delay = delays.average_delay();
  m.reward = delays.reward(weights);
  m.cumulative_reward = (result_.slots.empty() ? 0.0 : result_.slots.back().cumulative_reward) + m.reward;
  m.uploaded_ratio = is_federated(cfg_.policy) && raw_bits_ > 0.0 ? uploaded_bits_ / raw_bits_ : kNaN;
  result_.slots.push_back(std::move(m));
  ++slot_;
}

void Simulator::advance_to(std::size_t slot_exclusive) {
  slot_exclusive = std::min(slot_exclusive, cfg_.run.slots);
  while (slot_ < slot_exclusive) {
    run_slot();
    if (!is_federated(cfg_.policy) && is_learning(cfg_.policy)) train_tick(updates_after_slot(slot_ - 1));
  }
}

RunResult Simulator::run() {
  if (is_federated(cfg_.policy)) {
    const auto fed = cfg_.fed_config();
    auto global = dqn_.front()->net().params();
    std::vector<std::unique_ptr<AgentClient>> owned;
    std::vector<federation::FedClient*> clients;
    for (std::size_t n = 0; n < dqn_.size(); ++n) {
      owned.push_back(std::make_unique<AgentClient>(*dqn_[n], n == 0 ? this : nullptr));
      clients.push_back(owned.back().get());
    }
    for (std::size_t y = 0; y < fed.periods; ++y) {
      auto rec = federation::run_period(global, clients, fed, y, [&](std::size_t i) {
        advance_to(update_slot(y, i) + 1);
      });
      advance_to((y + 1) * period_len_);
      for (const auto& cr : rec.clients) {
        uploaded_bits_ += static_cast<double>(cr.bit_cost);
        raw_bits_ += static_cast<double>(cr.raw_bits);
      }
      double hits = 0.0;
      std::size_t count = 0;
      for (std::size_t t = y * period_len_; t < (y + 1) * period_len_ && t < result_.slots.size(); ++t) {
        hits += result_.slots[t].mean_hit_rate;
        ++count;
      }
      result_.period_hit_rate.push_back(count ? hits / static_cast<double>(count) : kNaN);
      result_.rounds.push_back(std::move(rec));
    }
    // Clients end each period on the aggregated model.
    for (auto* a : dqn_) a->load(global);
    advance_to(cfg_.run.slots);
    result_.uploaded_ratio = federation::uploaded_ratio(result_.rounds);
    result_.model_checksum = global.checksum();
  } else {
    advance_to(cfg_.run.slots);
    if (central_) {
      result_.model_checksum = central_->core().net().params().checksum();
    } else if (!dqn_.empty()) {
      result_.model_checksum = dqn_.front()->net().params().checksum();
    }
  }
  result_.summary = summarize(result_.slots, cfg_.warmup_slots());
  return std::move(result_);
}

RunResult run_simulation(const SimConfig& cfg, bool record_trace) {
  Simulator sim(cfg, record_trace);
  return sim.run();
}

}  // namespace fogcache::simctl
