#include "fogcache/neural/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace fogcache::neural {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayMemory::push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
  ++pushed_;
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t n, Rng& rng) const {
  const std::size_t m = items_.size();
  if (n > m) throw std::invalid_argument("replay: batch larger than memory");
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = m - n; j < m; ++j) {
    const std::size_t t = rng.below(j + 1);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t n, Rng& rng) const {
  std::vector<const Experience*> out;
  for (const auto i : sample_indices(n, rng)) out.push_back(&items_[i]);
  return out;
}

}  // namespace fogcache::neural
