#pragma once

#include <cstddef>
#include <vector>

#include "fogcache/neural/dueling_net.hpp"
#include "fogcache/rng.hpp"

namespace fogcache::neural {

/// Fixed-capacity ring buffer of experiences; the oldest record is overwritten
/// once full.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Total records ever pushed.
  std::size_t pushed() const { return pushed_; }
  const Experience& at(std::size_t i) const { return items_.at(i); }

  /// `n` distinct indices, uniformly at random (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  std::vector<const Experience*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t pushed_ = 0;
  std::vector<Experience> items_;
};

}  // namespace fogcache::neural
