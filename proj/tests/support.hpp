#pragma once

// Random networks and finite-difference checks shared by the unit and
// acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "fogcache/neural/dueling_net.hpp"
#include "fogcache/rng.hpp"

namespace fogcache::testing {

inline neural::NetShape random_shape(Rng& rng) {
  neural::NetShape s;
  s.input_dim = 2 + rng.below(7);
  s.hidden.assign(1 + rng.below(2), 0);
  for (auto& h : s.hidden) h = 3 + rng.below(10);
  s.num_actions = 2 + rng.below(5);
  return s;
}

inline std::vector<neural::Experience> random_batch(Rng& rng, const neural::NetShape& s, std::size_t n) {
  std::vector<neural::Experience> out(n);
  for (auto& e : out) {
    e.state.resize(s.input_dim);
    e.next_state.resize(s.input_dim);
    for (auto& x : e.state) x = rng.uniform(-1.0, 1.0);
    for (auto& x : e.next_state) x = rng.uniform(-1.0, 1.0);
    e.action = static_cast<std::uint32_t>(rng.below(s.num_actions));
    e.reward = rng.uniform(-1.0, 1.0);
  }
  return out;
}

inline std::vector<const neural::Experience*> pointers(const std::vector<neural::Experience>& v) {
  std::vector<const neural::Experience*> p;
  for (const auto& e : v) p.push_back(&e);
  return p;
}

/// |g - fd| / max(|g|, |fd|, floor), with fd the central difference of the
/// TD loss at step h.
inline double relative_error(double g, double fd, double floor = 1e-4) {
  return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), floor});
}

/// Largest relative error between td_loss's gradient and central finite
/// differences over every parameter of `pred`.
inline double gradcheck(const neural::DuelingNet& pred, const neural::DuelingNet& target,
                        const std::vector<neural::Experience>& batch, double gamma, double h = 1e-5) {
  const auto ptrs = pointers(batch);
  const auto analytic = neural::td_loss(pred, target, ptrs, gamma).gradient;
  neural::DuelingNet probe = pred;
  double worst = 0.0;
  for (std::size_t l = 0; l < probe.params().num_layers(); ++l) {
    for (int part = 0; part < 2; ++part) {
      auto& values = part == 0 ? probe.params().layer(l).weights : probe.params().layer(l).biases;
      const auto& grads = part == 0 ? analytic.layer(l).weights : analytic.layer(l).biases;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double keep = values[i];
        values[i] = keep + h;
        const double up = neural::td_loss(probe, target, ptrs, gamma).loss;
        values[i] = keep - h;
        const double down = neural::td_loss(probe, target, ptrs, gamma).loss;
        values[i] = keep;
        worst = std::max(worst, relative_error(grads[i], (up - down) / (2.0 * h)));
      }
    }
  }
  return worst;
}

/// Largest |Q - Q'| where Q' comes from the same net with `shift` added to
/// every advantage-head bias, over `states` random inputs.
inline double advantage_shift_error(const neural::DuelingNet& net, double shift, Rng& rng,
                                    std::size_t states = 8) {
  neural::DuelingNet shifted = net;
  auto& adv = shifted.params().layer(shifted.params().num_layers() - 1);
  for (auto& b : adv.biases) b += shift;
  double worst = 0.0;
  std::vector<double> s(net.input_dim());
  for (std::size_t k = 0; k < states; ++k) {
    for (auto& x : s) x = rng.uniform(-2.0, 2.0);
    const auto q = net.forward(s), q2 = shifted.forward(s);
    for (std::size_t a = 0; a < q.size(); ++a) worst = std::max(worst, std::abs(q[a] - q2[a]));
  }
  return worst;
}

}  // namespace fogcache::testing
