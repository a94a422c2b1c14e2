#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fogcache/env/world.hpp"
#include "fogcache/neural/dueling_net.hpp"

namespace fogcache::agents {

/// Builds the state vector: cache bits (F) ++ request one-hot (F) ++ the
/// requesting user's RB index scaled to [0, 1].
class StateEncoder {
 public:
  StateEncoder(std::size_t num_contents, std::size_t num_rbs);

  std::size_t dim() const { return 2 * num_contents_ + 1; }
  void encode(const env::FapState& fap, env::ContentId request, std::size_t rb,
              std::span<double> out) const;
  std::vector<double> encode(const env::FapState& fap, env::ContentId request,
                             std::size_t rb) const;

 private:
  std::size_t num_contents_;
  std::size_t num_rbs_;
};

/// Action 0 keeps the cache unchanged; action i >= 1 evicts cache slot i
/// (the i-th smallest cached content id).
using Action = std::uint32_t;

/// Number of valid actions for a cache: occupied slots + 1.
inline std::size_t valid_actions(const env::FapState& fap) { return fap.occupied() + 1; }

/// Content evicted by `a`, or nothing for the no-op. Throws std::out_of_range
/// for a slot that is not occupied.
std::optional<env::ContentId> evicted_content(const env::FapState& fap, Action a);

/// Slot action that evicts `f`; throws env::CacheError if f is not cached.
Action action_for(const env::FapState& fap, env::ContentId f);

/// What a policy sees when asked for a replacement decision.
struct Decision {
  const env::FapState& fap;
  env::ContentId request;
  std::span<const double> state;  // StateEncoder output
};

/// Cache-replacement policy driven by the simulator. `on_request` is called
/// for every request at the policy's F-AP; `act` only when a cloud-served
/// request finds the cache full.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual void on_request(env::ContentId /*f*/) {}
  virtual Action act(const Decision& d) = 0;
  virtual void observe(neural::Experience /*e*/) {}
};

/// Per-content request counters and recency stamps of one F-AP.
class PolicyStats {
 public:
  explicit PolicyStats(std::size_t num_contents);

  void touch(env::ContentId f);
  std::uint64_t count(env::ContentId f) const { return count_.at(f); }
  /// Logical time of the last request; 0 if never requested.
  std::uint64_t last_use(env::ContentId f) const { return last_.at(f); }
  std::uint64_t clock() const { return clock_; }

 private:
  std::vector<std::uint64_t> count_;
  std::vector<std::uint64_t> last_;
  std::uint64_t clock_ = 0;
};

/// Cached content with the oldest request; ties to the lowest id.
/// Throws env::CacheError on an empty cache.
env::ContentId lru_victim(const PolicyStats& stats, std::span<const env::ContentId> cache);

/// Cached content with the fewest requests; ties to the lowest id.
/// Throws env::CacheError on an empty cache.
env::ContentId lfu_victim(const PolicyStats& stats, std::span<const env::ContentId> cache);

class LruPolicy : public Policy {
 public:
  explicit LruPolicy(std::size_t num_contents) : stats_(num_contents) {}
  std::string_view name() const override { return "lru"; }
  void on_request(env::ContentId f) override { stats_.touch(f); }
  Action act(const Decision& d) override;
  const PolicyStats& stats() const { return stats_; }

 private:
  PolicyStats stats_;
};

class LfuPolicy : public Policy {
 public:
  explicit LfuPolicy(std::size_t num_contents) : stats_(num_contents) {}
  std::string_view name() const override { return "lfu"; }
  void on_request(env::ContentId f) override { stats_.touch(f); }
  Action act(const Decision& d) override;
  const PolicyStats& stats() const { return stats_; }

 private:
  PolicyStats stats_;
};

}  // namespace fogcache::agents
