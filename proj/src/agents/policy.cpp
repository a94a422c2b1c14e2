#include "fogcache/agents/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace fogcache::agents {

StateEncoder::StateEncoder(std::size_t num_contents, std::size_t num_rbs)
    : num_contents_(num_contents), num_rbs_(num_rbs) {
  if (num_contents == 0 || num_rbs == 0) throw std::invalid_argument("state encoder: empty dimensions");
}

void StateEncoder::encode(const env::FapState& fap, env::ContentId request, std::size_t rb,
                          std::span<double> out) const {
  if (out.size() != dim()) throw std::invalid_argument("state encoder: wrong output length");
  if (fap.num_contents() != num_contents_ || request >= num_contents_ || rb >= num_rbs_) {
    throw std::invalid_argument("state encoder: input outside the encoded ranges");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto f : fap.slots()) out[f] = 1.0;
  out[num_contents_ + request] = 1.0;
  out[2 * num_contents_] =
      num_rbs_ > 1 ? static_cast<double>(rb) / static_cast<double>(num_rbs_ - 1) : 0.0;
}

std::vector<double> StateEncoder::encode(const env::FapState& fap, env::ContentId request,
                                         std::size_t rb) const {
  std::vector<double> out(dim());
  encode(fap, request, rb, out);
  return out;
}

std::optional<env::ContentId> evicted_content(const env::FapState& fap, Action a) {
  if (a == 0) return std::nullopt;
  if (a > fap.occupied()) throw std::out_of_range("action names an empty cache slot");
  return fap.slots()[a - 1];
}

Action action_for(const env::FapState& fap, env::ContentId f) {
  const auto slots = fap.slots();
  const auto it = std::lower_bound(slots.begin(), slots.end(), f);
  if (it == slots.end() || *it != f) throw env::CacheError("content is not cached");
  return static_cast<Action>(it - slots.begin() + 1);
}

PolicyStats::PolicyStats(std::size_t num_contents) : count_(num_contents, 0), last_(num_contents, 0) {}

void PolicyStats::touch(env::ContentId f) {
  ++clock_;
  ++count_.at(f);
  last_[f] = clock_;
}

namespace {
template <typename Key>
env::ContentId argmin(std::span<const env::ContentId> cache, Key key) {
  if (cache.empty()) throw env::CacheError("no content to evict from an empty cache");
  env::ContentId best = cache[0];
  for (const auto f : cache) {
    const auto kf = key(f);
    const auto kb = key(best);
    if (kf < kb || (kf == kb && f < best)) best = f;
  }
  return best;
}
}  // namespace

env::ContentId lru_victim(const PolicyStats& stats, std::span<const env::ContentId> cache) {
  return argmin(cache, [&](env::ContentId f) { return stats.last_use(f); });
}

env::ContentId lfu_victim(const PolicyStats& stats, std::span<const env::ContentId> cache) {
  return argmin(cache, [&](env::ContentId f) { return stats.count(f); });
}

Action LruPolicy::act(const Decision& d) {
  return action_for(d.fap, lru_victim(stats_, d.fap.slots()));
}

Action LfuPolicy::act(const Decision& d) {
  return action_for(d.fap, lfu_victim(stats_, d.fap.slots()));
}

}  // namespace fogcache::agents
