#include "fogcache/neural/dueling_net.hpp"

#include <algorithm>
#include <cmath>

#include "fogcache/kernels.hpp"
#include "fogcache/rng.hpp"

namespace fogcache::neural {

namespace {
std::vector<Layer> layers_for(const NetShape& s) {
  if (s.input_dim == 0 || s.num_actions == 0 || s.hidden.empty()) {
    throw ShapeError("dueling net needs an input, at least one hidden layer and one action");
  }
  std::vector<Layer> layers;
  std::size_t in = s.input_dim;
  for (const auto h : s.hidden) {
    if (h == 0) throw ShapeError("hidden layer width must be positive");
    layers.emplace_back(in, h);
    in = h;
  }
  layers.emplace_back(in, 1);
  layers.emplace_back(in, s.num_actions);
  return layers;
}

kernels::DenseShape dense(const Layer& l) { return {l.in_dim, l.out_dim}; }
}  // namespace

DuelingNet::DuelingNet(NetShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  params_ = LayeredParams(layers_for(shape_));
  Rng rng(seed);
  for (auto& l : params_.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_dim));
    for (auto& w : l.weights) w = rng.uniform(-bound, bound);
    for (auto& b : l.biases) b = rng.uniform(-bound, bound);
  }
}

DuelingNet::DuelingNet(NetShape shape, LayeredParams params)
    : shape_(std::move(shape)), params_(std::move(params)) {
  check_params();
}

void DuelingNet::check_params() const {
  if (!params_.conformable(LayeredParams(layers_for(shape_)))) {
    throw ShapeError("parameters do not match the network shape");
  }
}

void DuelingNet::merge(double value, std::span<const double> advantage, std::span<double> q) {
  double mean = 0.0;
  for (const double a : advantage) mean += a;
  mean /= static_cast<double>(advantage.size());
  for (std::size_t i = 0; i < advantage.size(); ++i) q[i] = value + (advantage[i] - mean);
}

std::vector<double> DuelingNet::forward(std::span<const double> state) const {
  std::vector<double> q(shape_.num_actions);
  forward_batch(state, 1, q);
  return q;
}

void DuelingNet::forward_batch(std::span<const double> states, std::size_t batch,
                               std::span<double> q, ForwardTape* tape) const {
  if (states.size() != batch * shape_.input_dim) throw ShapeError("state length does not match the input dimension");
  if (q.size() != batch * shape_.num_actions) throw ShapeError("Q buffer has the wrong length");

  ForwardTape local;
  ForwardTape& t = tape ? *tape : local;
  t.batch = batch;
  t.input.assign(states.begin(), states.end());
  t.hidden.resize(shape_.hidden.size());

  std::span<const double> in = t.input;
  for (std::size_t i = 0; i < shape_.hidden.size(); ++i) {
    const auto& l = params_.layer(i);
    auto& h = t.hidden[i];
    h.assign(batch * l.out_dim, 0.0);
    kernels::parallel::dense_forward(dense(l), l.weights, l.biases, in, batch, h);
    for (auto& v : h) v = v > 0.0 ? v : 0.0;
    in = h;
  }
  const auto& vl = params_.layer(value_layer());
  const auto& al = params_.layer(advantage_layer());
  t.value.assign(batch, 0.0);
  t.advantage.assign(batch * shape_.num_actions, 0.0);
  kernels::parallel::dense_forward(dense(vl), vl.weights, vl.biases, in, batch, t.value);
  kernels::parallel::dense_forward(dense(al), al.weights, al.biases, in, batch, t.advantage);

  const std::size_t A = shape_.num_actions;
  for (std::size_t b = 0; b < batch; ++b) {
    merge(t.value[b], std::span<const double>(t.advantage).subspan(b * A, A), q.subspan(b * A, A));
  }
}

void DuelingNet::backward(const ForwardTape& tape, std::span<const double> grad_q,
                          LayeredParams& grad) const {
  params_.require_conformable(grad);
  const std::size_t B = tape.batch;
  const std::size_t A = shape_.num_actions;
  if (grad_q.size() != B * A) throw ShapeError("grad_q has the wrong length");

  // dQ_a/dV = 1 and dQ_a/dA_j = [a == j] - 1/A.
  std::vector<double> g_value(B, 0.0);
  std::vector<double> g_adv(B * A, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    double sum = 0.0;
    for (std::size_t a = 0; a < A; ++a) sum += grad_q[b * A + a];
    g_value[b] = sum;
    const double mean = sum / static_cast<double>(A);
    for (std::size_t a = 0; a < A; ++a) g_adv[b * A + a] = grad_q[b * A + a] - mean;
  }

  const std::size_t top = shape_.hidden.size() - 1;
  const auto& last = tape.hidden[top];
  const std::size_t width = shape_.hidden[top];
  std::vector<double> g_h(B * width, 0.0);
  std::vector<double> tmp(B * width, 0.0);

  auto& vg = grad.layer(value_layer());
  auto& ag = grad.layer(advantage_layer());
  const auto& vl = params_.layer(value_layer());
  const auto& al = params_.layer(advantage_layer());
  kernels::parallel::dense_backward(dense(vl), vl.weights, last, g_value, B, vg.weights, vg.biases, g_h);
  kernels::parallel::dense_backward(dense(al), al.weights, last, g_adv, B, ag.weights, ag.biases, tmp);
  for (std::size_t i = 0; i < g_h.size(); ++i) g_h[i] += tmp[i];

  for (std::size_t i = shape_.hidden.size(); i-- > 0;) {
    const auto& h = tape.hidden[i];
    for (std::size_t j = 0; j < g_h.size(); ++j) {
      if (!(h[j] > 0.0)) g_h[j] = 0.0;
    }
    const auto& l = params_.layer(i);
    auto& lg = grad.layer(i);
    std::span<const double> in = i == 0 ? std::span<const double>(tape.input) : std::span<const double>(tape.hidden[i - 1]);
    std::vector<double> g_in;
    if (i > 0) g_in.assign(B * l.in_dim, 0.0);
    kernels::parallel::dense_backward(dense(l), l.weights, in, g_h, B, lg.weights, lg.biases, g_in);
    g_h = std::move(g_in);
  }
}

LossResult td_loss(const DuelingNet& pred, const DuelingNet& target,
                   std::span<const Experience* const> batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("td_loss: gamma must lie in [0, 1)");
  if (!(pred.shape() == target.shape())) throw ShapeError("td_loss: networks differ in shape");

  const std::size_t B = batch.size();
  const std::size_t D = pred.input_dim();
  const std::size_t A = pred.num_actions();
  std::vector<double> s(B * D), s_next(B * D);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& e = *batch[b];
    if (e.state.size() != D || e.next_state.size() != D) throw ShapeError("td_loss: state length mismatch");
    if (e.action >= A) throw std::out_of_range("td_loss: action out of range");
    std::copy(e.state.begin(), e.state.end(), s.begin() + static_cast<std::ptrdiff_t>(b * D));
    std::copy(e.next_state.begin(), e.next_state.end(), s_next.begin() + static_cast<std::ptrdiff_t>(b * D));
  }

  std::vector<double> q_next(B * A);
  if (gamma > 0.0) target.forward_batch(s_next, B, q_next);

  ForwardTape tape;
  std::vector<double> q(B * A);
  pred.forward_batch(s, B, q, &tape);

  LossResult out;
  out.gradient = pred.params().zeros_like();
  std::vector<double> grad_q(B * A, 0.0);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& e = *batch[b];
    double y = e.reward;
    if (gamma > 0.0) {
      y += gamma * *std::max_element(q_next.begin() + static_cast<std::ptrdiff_t>(b * A),
                                     q_next.begin() + static_cast<std::ptrdiff_t>((b + 1) * A));
    }
    const double err = y - q[b * A + e.action];
    out.loss += err * err * inv_b;
    grad_q[b * A + e.action] = -2.0 * err * inv_b;
  }
  pred.backward(tape, grad_q, out.gradient);
  return out;
}

void sync_target(const DuelingNet& pred, DuelingNet& target, std::uint64_t step,
                 std::uint64_t period) {
  if (period == 0) throw std::invalid_argument("sync period must be at least 1");
  if (step % period == 0) target = pred;
}

}  // namespace fogcache::neural
