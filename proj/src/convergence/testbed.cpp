#include "fogcache/convergence/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "fogcache/io/csv.hpp"

namespace fogcache::convergence {

namespace {

constexpr double kTruncation = 6.0;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  double m = 0.0;
  for (const double v : x) m += v;
  m /= n;
  double ss = 0.0;
  for (const double v : x) ss += (v - m) * (v - m);
  return {m, x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

neural::LayeredParams as_params(std::span<const double> v) {
  neural::Layer l(v.size(), 1);
  std::copy(v.begin(), v.end(), l.weights.begin());
  return neural::LayeredParams({std::move(l)});
}

}  // namespace

double QuadraticClient::value(std::span<const double> theta) const {
  double f = 0.0;
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double d = theta[i] - center[i];
    f += 0.5 * curvature[i] * d * d;
  }
  return f;
}

void QuadraticClient::gradient(std::span<const double> theta, std::span<double> out) const {
  for (std::size_t i = 0; i < center.size(); ++i) out[i] = curvature[i] * (theta[i] - center[i]);
}

double Problem::mu() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : clients) m = std::min(m, *std::min_element(c.curvature.begin(), c.curvature.end()));
  return m;
}

double Problem::beta() const {
  double m = 0.0;
  for (const auto& c : clients) m = std::max(m, *std::max_element(c.curvature.begin(), c.curvature.end()));
  return m;
}

double Problem::weighted_noise() const {
  double s = 0.0;
  for (const auto& c : clients) s += c.weight * c.weight * c.noise_std * c.noise_std;
  return s;
}

void Problem::validate() const {
  if (clients.empty()) throw std::invalid_argument("testbed: no clients");
  const std::size_t d = dim();
  if (d == 0) throw std::invalid_argument("testbed: zero dimension");
  double total = 0.0;
  for (const auto& c : clients) {
    if (c.center.size() != d || c.curvature.size() != d) {
      throw std::invalid_argument("testbed: clients disagree on dimension");
    }
    for (const double a : c.curvature) {
      if (!(a > 0.0)) throw std::invalid_argument("testbed: curvature must be positive");
    }
    if (!(c.noise_std >= 0.0)) throw std::invalid_argument("testbed: noise must be non-negative");
    if (!(c.weight >= 0.0)) throw std::invalid_argument("testbed: weights must be non-negative");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("testbed: weights must sum to 1");
}

Optimum optimum(const Problem& problem) {
  problem.validate();
  const std::size_t d = problem.dim();
  Optimum out;
  out.theta.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& c : problem.clients) {
      num += c.weight * c.curvature[i] * c.center[i];
      den += c.weight * c.curvature[i];
    }
    out.theta[i] = num / den;
  }
  for (const auto& c : problem.clients) out.phi += c.weight * c.value(out.theta);
  return out;
}

double truncated_normal_std() {
  const double c = kTruncation;
  const double pdf = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
  const double mass = std::erf(c / std::numbers::sqrt2);
  return std::sqrt(1.0 - 2.0 * c * pdf / mass);
}

void draw_noise(Rng& rng, double sigma, std::span<double> out) {
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double scale = sigma / std::sqrt(static_cast<double>(out.size())) / truncated_normal_std();
  for (auto& v : out) {
    double z = rng.normal();
    while (std::abs(z) > kTruncation) z = rng.normal();
    v = scale * z;
  }
}

void validate_step_sizes(std::span<const double> phi, double mu, double beta, std::size_t X) {
  if (phi.empty()) throw PreconditionError("step sizes: empty schedule");
  if (X == 0) throw PreconditionError("step sizes: X must be at least 1");
  const double cap = std::min(1.0 / mu, 1.0 / (4.0 * beta));
  if (!(phi[0] > 0.0) || phi[0] > cap * (1.0 + 1e-12)) {
    throw PreconditionError("step sizes: phi_1 = " + std::to_string(phi[0]) +
                            " exceeds min(1/mu, 1/(4 beta)) = " + std::to_string(cap));
  }
  for (std::size_t t = 1; t < phi.size(); ++t) {
    if (!(phi[t] < phi[t - 1])) {
      throw PreconditionError("step sizes: not decaying at t = " + std::to_string(t + 1));
    }
  }
  for (std::size_t t = 0; t + X < phi.size(); ++t) {
    if (phi[t] > 2.0 * phi[t + X]) {
      throw PreconditionError("step sizes: phi_t > 2 phi_{t+X} at t = " + std::to_string(t + 1));
    }
  }
}

void validate_schedule(const federation::StepSchedule& s, double mu, double beta, std::size_t X,
                       std::size_t T) {
  if (!(s.b * mu > 1.0)) throw PreconditionError("schedule: need b > 1/mu");
  if (!(s.a > 0.0)) throw PreconditionError("schedule: need a > 0");
  // φ_t ≤ 2φ_{t+X} for every t ≥ 1 reduces to X ≤ 1 + a.
  if (static_cast<double>(X) > 1.0 + s.a) {
    throw PreconditionError("schedule: phi_t > 2 phi_{t+X} at t = 1");
  }
  std::vector<double> phi(std::max<std::size_t>(T, 1));
  for (std::size_t t = 0; t < phi.size(); ++t) phi[t] = s(t + 1);
  validate_step_sizes(phi, mu, beta, X);
}

federation::StepSchedule default_schedule(double mu, double beta, std::size_t X) {
  const double b = 2.0 / mu;
  const double a = std::max({1.0, 4.0 * beta * b - 1.0, static_cast<double>(X) - 1.0});
  return {b, a};
}

FedSgd::FedSgd(const Problem& problem, std::span<const double> start,
               const fedcompress::CompressOptions* quantize)
    : problem_(problem), quantize_(quantize), anchor_(start.begin(), start.end()) {
  if (start.size() != problem.dim()) throw std::invalid_argument("testbed: start has the wrong dimension");
  theta_.assign(problem.clients.size(), anchor_);
}

std::vector<double> FedSgd::theta_bar() const {
  std::vector<double> bar(problem_.dim(), 0.0);
  for (std::size_t n = 0; n < theta_.size(); ++n) {
    for (std::size_t i = 0; i < bar.size(); ++i) bar[i] += problem_.clients[n].weight * theta_[n][i];
  }
  return bar;
}

FedSgd::Step FedSgd::step(std::size_t t, double phi, std::size_t X, Rng& rng,
                          std::span<double> grad_sq) {
  const std::size_t d = problem_.dim();
  const std::size_t N = theta_.size();
  Step out;
  out.theta_bar = theta_bar();
  out.stochastic_mean.assign(d, 0.0);
  out.v_bar.assign(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> noise(d);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& c = problem_.clients[n];
    c.gradient(theta_[n], grad);
    if (!grad_sq.empty()) {
      double g2 = 0.0;
      for (const double g : grad) g2 += g * g;
      grad_sq[n] = g2;
    }
    draw_noise(rng, c.noise_std, noise);
    for (std::size_t i = 0; i < d; ++i) {
      const double g = grad[i] + noise[i];
      out.stochastic_mean[i] += c.weight * g;
      theta_[n][i] -= phi * g;  // now v^n_{t+1}
      out.v_bar[i] += c.weight * theta_[n][i];
    }
  }

  out.aggregated = (t + 1) % X == 0;
  if (!out.aggregated) {
    out.next_theta_bar = out.v_bar;
    return out;
  }
  if (quantize_) {
    const auto before = as_params(anchor_);
    std::vector<double> next = anchor_;
    for (std::size_t n = 0; n < N; ++n) {
      const auto update = fedcompress::compress(before, as_params(theta_[n]), 1.0, *quantize_);
      const auto delta = fedcompress::decode(update, before);
      const auto& w = delta.layer(0).weights;
      for (std::size_t i = 0; i < d; ++i) next[i] += problem_.clients[n].weight * w[i];
    }
    anchor_ = next;
  } else {
    anchor_ = out.v_bar;
  }
  for (auto& th : theta_) th = anchor_;
  out.next_theta_bar = anchor_;
  return out;
}

double theorem1_constant(double weighted_noise, double beta, double phi_gap, std::size_t X,
                         double gradient_bound_sq) {
  const double xm1 = static_cast<double>(X) - 1.0;
  return weighted_noise + 6.0 * beta * phi_gap + 8.0 * xm1 * xm1 * gradient_bound_sq;
}

double theorem2_constant(const federation::StepSchedule& s, double mu, double H, double delta1) {
  return std::max(s.b * s.b * H / (s.b * mu - 1.0), (s.a + 1.0) * delta1);
}

TheoremTrace run_fedsgd(const Problem& problem, const RunOptions& options) {
  const auto opt = optimum(problem);
  const std::size_t X = options.local_steps;
  const std::size_t T = X * options.periods;
  const std::size_t R = options.replicas;
  const std::size_t N = problem.clients.size();
  const std::size_t d = problem.dim();
  if (X == 0 || options.periods == 0) throw std::invalid_argument("testbed: X and Y must be positive");
  if (R < 2) throw std::invalid_argument("testbed: need at least two replicas");

  TheoremTrace trace;
  trace.mu = problem.mu();
  trace.beta = problem.beta();
  trace.phi_gap = opt.phi;
  trace.weighted_noise = problem.weighted_noise();
  trace.local_steps = X;
  trace.replicas = R;
  trace.schedule = options.schedule;
  trace.quantized = options.quantize.has_value();
  if (options.check_preconditions) validate_schedule(options.schedule, trace.mu, trace.beta, X, T);

  std::vector<double> start = options.start;
  if (start.empty()) start.assign(d, 0.0);
  if (start.size() != d) throw std::invalid_argument("testbed: start has the wrong dimension");

  trace.sq_error.assign((T + 1) * R, 0.0);
  std::vector<double> grad_sq(R * T * N, 0.0);
  std::vector<double> quant_sq(trace.quantized ? (T + 1) * R : 0, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sr = 0; sr < static_cast<std::ptrdiff_t>(R); ++sr) {
    const auto r = static_cast<std::size_t>(sr);
    {
      Rng rng(derive_seed(options.seed, stream::kNoise, r));
      FedSgd sgd(problem, start);
      trace.sq_error[r] = sq_dist(start, opt.theta);
      for (std::size_t t = 1; t <= T; ++t) {
        const auto s = sgd.step(t, options.schedule(t), X, rng,
                                std::span<double>(grad_sq).subspan((r * T + t - 1) * N, N));
        trace.sq_error[t * R + r] = sq_dist(s.next_theta_bar, opt.theta);
      }
    }
    if (trace.quantized) {
      Rng rng(derive_seed(options.seed, stream::kNoise, r));
      FedSgd sgd(problem, start, &*options.quantize);
      quant_sq[r] = sq_dist(start, opt.theta);
      for (std::size_t t = 1; t <= T; ++t) {
        const auto s = sgd.step(t, options.schedule(t), X, rng);
        quant_sq[t * R + r] = sq_dist(s.next_theta_bar, opt.theta);
      }
    }
  }

  double g2 = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      double m = 0.0;
      for (std::size_t r = 0; r < R; ++r) m += grad_sq[(r * T + t) * N + n];
      const double sigma = problem.clients[n].noise_std;
      g2 = std::max(g2, m / static_cast<double>(R) + sigma * sigma);
    }
  }
  trace.gradient_bound_sq = g2;
  trace.H = theorem1_constant(trace.weighted_noise, trace.beta, trace.phi_gap, X, g2);
  trace.delta1 = sq_dist(start, opt.theta);
  trace.rho = theorem2_constant(options.schedule, trace.mu, trace.H, trace.delta1);

  trace.steps.resize(T);
  for (std::size_t t = 1; t <= T; ++t) {
    auto& st = trace.steps[t - 1];
    const auto now = mean_se(std::span<const double>(trace.sq_error).subspan((t - 1) * R, R));
    const auto next = mean_se(std::span<const double>(trace.sq_error).subspan(t * R, R));
    st.t = t;
    st.phi = options.schedule(t);
    st.delta = now.mean;
    st.delta_se = now.se;
    st.next_delta = next.mean;
    st.theorem1_rhs = (1.0 - trace.mu * st.phi) * st.delta + st.phi * st.phi * trace.H;
    st.theorem2_bound = trace.rho / (options.schedule.a + static_cast<double>(t));
    st.aggregated = (t + 1) % X == 0;
    if (trace.quantized) st.quantized_delta = mean_se(std::span<const double>(quant_sq).subspan((t - 1) * R, R)).mean;
  }
  return trace;
}

CheckReport check_theorem1(const TheoremTrace& trace, double h_factor, double tolerance_se) {
  CheckReport rep;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  const std::size_t R = trace.replicas;
  std::vector<double> diff(R);
  for (const auto& st : trace.steps) {
    const double contraction = 1.0 - trace.mu * st.phi;
    const double noise = st.phi * st.phi * h_factor * trace.H;
    for (std::size_t r = 0; r < R; ++r) {
      diff[r] = trace.sq_error_at(st.t + 1, r) - contraction * trace.sq_error_at(st.t, r) - noise;
    }
    const auto m = mean_se(diff);
    const double slack = tolerance_se * m.se + 1e-12 * (1.0 + std::abs(contraction * st.delta) + noise);
    const double margin = m.mean - slack;
    const bool ok = margin <= 0.0;
    rep.holds.push_back(ok);
    rep.violations += !ok;
    rep.worst_margin = std::max(rep.worst_margin, margin);
  }
  if (trace.steps.empty()) rep.worst_margin = 0.0;
  return rep;
}

CheckReport check_theorem2(const TheoremTrace& trace, double tolerance_se) {
  CheckReport rep;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& st : trace.steps) {
    const double margin =
        st.delta - tolerance_se * st.delta_se - st.theorem2_bound * (1.0 + 1e-12);
    const bool ok = margin <= 0.0;
    rep.holds.push_back(ok);
    rep.violations += !ok;
    rep.worst_margin = std::max(rep.worst_margin, margin);
  }
  if (trace.steps.empty()) rep.worst_margin = 0.0;
  return rep;
}

void write_trace_csv(std::ostream& out, const TheoremTrace& trace) {
  io::CsvWriter csv(out);
  if (trace.quantized) {
    csv.header({"t", "delta", "theorem1_rhs", "theorem2_bound", "quantized_delta"});
  } else {
    csv.header({"t", "delta", "theorem1_rhs", "theorem2_bound"});
  }
  for (const auto& st : trace.steps) {
    if (trace.quantized) {
      csv.row(st.t, st.delta, st.theorem1_rhs, st.theorem2_bound, st.quantized_delta);
    } else {
      csv.row(st.t, st.delta, st.theorem1_rhs, st.theorem2_bound);
    }
  }
}

Problem make_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.clients == 0 || spec.dim == 0) throw std::invalid_argument("instance: empty shape");
  if (!(spec.mu > 0.0) || spec.beta < spec.mu) throw std::invalid_argument("instance: need 0 < mu <= beta");
  if (spec.family == Family::Isotropic && spec.beta != spec.mu) {
    throw std::invalid_argument("instance: isotropic family needs beta == mu");
  }
  if (spec.family == Family::Anisotropic && spec.dim < 2 && spec.beta != spec.mu) {
    throw std::invalid_argument("instance: anisotropic family needs two dimensions");
  }
  Rng rng(derive_seed(seed, stream::kInstance, 0));
  std::vector<double> curvature(spec.dim, spec.mu);
  if (spec.family == Family::Anisotropic) {
    for (auto& a : curvature) a = rng.uniform(spec.mu, spec.beta);
    curvature.front() = spec.mu;
    curvature.back() = spec.beta;
  }
  Problem p;
  double total = 0.0;
  for (std::size_t n = 0; n < spec.clients; ++n) {
    QuadraticClient c;
    c.curvature = curvature;
    c.center.resize(spec.dim);
    for (auto& x : c.center) x = spec.center_spread * rng.normal();
    c.noise_std = spec.noise * rng.uniform(0.5, 1.5);
    c.weight = rng.uniform(0.5, 1.5);
    total += c.weight;
    p.clients.push_back(std::move(c));
  }
  for (auto& c : p.clients) c.weight /= total;
  return p;
}

std::vector<SweepCase> standard_sweep(std::uint64_t seed, std::size_t steps, std::size_t replicas) {
  constexpr std::size_t kClients[] = {2, 5, 10};
  constexpr std::size_t kLocalSteps[] = {1, 2, 5, 10};
  constexpr std::size_t kDim = 3;
  std::vector<SweepCase> cases;
  for (const auto clients : kClients) {
    for (const auto X : kLocalSteps) {
      SweepCase c;
      c.index = cases.size();
      const bool aniso = c.index % 2 == 1;
      c.spec.clients = clients;
      c.spec.dim = kDim;
      c.spec.family = aniso ? Family::Anisotropic : Family::Isotropic;
      c.spec.mu = 1.0;
      c.spec.beta = aniso ? 2.0 : 1.0;
      c.spec.center_spread = 2.0;
      c.spec.noise = 1.0;
      c.problem = make_instance(c.spec, seed + 100 + c.index);
      c.options.local_steps = X;
      c.options.periods = std::max<std::size_t>(1, steps / X);
      c.options.schedule = default_schedule(c.problem.mu(), c.problem.beta(), X);
      c.options.replicas = replicas;
      c.options.seed = seed + c.index;
      c.options.start.assign(kDim, 5.0);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepResult> results) {
  io::CsvWriter csv(out);
  csv.header({"instance", "clients", "local_steps", "family", "t", "phi", "delta", "delta_se", "next_delta",
              "theorem1_rhs", "theorem2_bound", "theorem1_holds", "theorem2_holds"});
  for (const auto& r : results) {
    const auto& spec = r.instance->spec;
    const char* family = spec.family == Family::Anisotropic ? "anisotropic" : "isotropic";
    for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
      const auto& st = r.trace.steps[i];
      const int h1 = i < r.theorem1.holds.size() ? int(r.theorem1.holds[i]) : 1;
      const int h2 = i < r.theorem2.holds.size() ? int(r.theorem2.holds[i]) : 1;
      csv.row(r.instance->index, spec.clients, r.trace.local_steps, family, st.t, st.phi, st.delta,
              st.delta_se, st.next_delta, st.theorem1_rhs, st.theorem2_bound, h1, h2);
    }
  }
}

}  // namespace fogcache::convergence
