#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fogcache/convergence/testbed.hpp"

using namespace fogcache;
using namespace fogcache::convergence;

namespace {

QuadraticClient client(std::vector<double> center, std::vector<double> curvature, double sigma, double w) {
  return {std::move(center), std::move(curvature), sigma, w};
}

}  // namespace

TEST(Optimum, TwoClientGap) {
  // p = (1/2, 1/2), centers 0 and 2, curvature μ: θ* = 1 and Φ = μ/2.
  for (double mu : {0.5, 1.0, 3.0}) {
    Problem p{{client({0.0}, {mu}, 0.0, 0.5), client({2.0}, {mu}, 0.0, 0.5)}};
    const auto o = optimum(p);
    EXPECT_DOUBLE_EQ(o.theta[0], 1.0);
    EXPECT_DOUBLE_EQ(o.phi, mu / 2.0);
  }
}

TEST(Optimum, GradientVanishes) {
  const auto p = make_instance({6, 4, Family::Anisotropic, 0.5, 3.0, 2.0, 1.0}, 9);
  const auto o = optimum(p);
  std::vector<double> g(4), total(4, 0.0);
  for (const auto& c : p.clients) {
    c.gradient(o.theta, g);
    for (std::size_t i = 0; i < 4; ++i) total[i] += c.weight * g[i];
  }
  for (double x : total) EXPECT_NEAR(x, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.mu(), 0.5);
  EXPECT_DOUBLE_EQ(p.beta(), 3.0);
}

TEST(Optimum, IidClientsHaveNoGap) {
  Problem p{{client({1.0, -2.0}, {1.0, 2.0}, 1.0, 0.3), client({1.0, -2.0}, {1.0, 2.0}, 0.5, 0.7)}};
  EXPECT_EQ(optimum(p).phi, 0.0);
}

TEST(Problem, Validation) {
  Problem p{{client({0.0}, {1.0}, 0.0, 0.4), client({0.0}, {1.0}, 0.0, 0.4)}};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  Problem q{{client({0.0}, {0.0}, 0.0, 1.0)}};
  EXPECT_THROW(q.validate(), std::invalid_argument);
  Problem r{{client({0.0, 1.0}, {1.0, 1.0}, 0.0, 0.5), client({0.0}, {1.0}, 0.0, 0.5)}};
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(Constants, HandComputed) {
  // 0.5 + 6·1·0.5 + 8·(2 − 1)²·4 = 35.5.
  EXPECT_DOUBLE_EQ(theorem1_constant(0.5, 1.0, 0.5, 2, 4.0), 35.5);
  EXPECT_DOUBLE_EQ(theorem1_constant(0.5, 1.0, 0.5, 1, 4.0), 3.5);
  // max{4·35.5/(2 − 1), 4·9} = 142.
  EXPECT_DOUBLE_EQ(theorem2_constant({2.0, 3.0}, 1.0, 35.5, 9.0), 142.0);
  EXPECT_DOUBLE_EQ(theorem2_constant({2.0, 3.0}, 1.0, 1.0, 9.0), 36.0);
}

TEST(Noise, SecondMomentIsSigmaSquared) {
  Rng rng(1);
  const double sigma = 1.7;
  const int n = 40000;
  std::vector<double> xi(3);
  double s = 0.0, s2 = 0.0, mean0 = 0.0;
  for (int i = 0; i < n; ++i) {
    draw_noise(rng, sigma, xi);
    const double sq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    s += sq;
    s2 += sq * sq;
    mean0 += xi[0];
  }
  const double m = s / n;
  const double se = std::sqrt((s2 / n - m * m) / n);
  EXPECT_NEAR(m, sigma * sigma, 3.0 * se);
  EXPECT_NEAR(mean0 / n, 0.0, 4.0 * sigma / std::sqrt(3.0 * n));
  EXPECT_NEAR(truncated_normal_std(), 1.0, 1e-6);
  EXPECT_LT(truncated_normal_std(), 1.0);
}

TEST(Schedule, ConstantRateRejected) {
  const std::vector<double> phi(20, 0.1);
  EXPECT_THROW(validate_step_sizes(phi, 1.0, 1.0, 2), PreconditionError);
}

TEST(Schedule, HypothesesChecked) {
  std::vector<double> phi{0.3, 0.2, 0.1};
  EXPECT_THROW(validate_step_sizes(phi, 1.0, 1.0, 1), PreconditionError);  // φ_1 > 1/(4β)
  phi = {0.2, 0.15, 0.05};
  EXPECT_THROW(validate_step_sizes(phi, 1.0, 1.0, 1), PreconditionError);  // φ_2 > 2 φ_3
  EXPECT_NO_THROW(validate_step_sizes(phi, 1.0, 1.0, 3));
  EXPECT_THROW(validate_schedule({0.5, 8.0}, 1.0, 1.0, 1, 10), PreconditionError);  // b ≤ 1/μ
  EXPECT_THROW(validate_schedule({2.0, 8.0}, 1.0, 1.0, 10, 50), PreconditionError);  // X > 1 + a
  EXPECT_NO_THROW(validate_schedule({2.0, 9.0}, 1.0, 1.0, 10, 50));
}

TEST(Schedule, DefaultAlwaysValid) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double mu = rng.uniform(0.05, 5.0);
    const double beta = mu * rng.uniform(1.0, 20.0);
    const std::size_t X = 1 + rng.below(30);
    const auto s = default_schedule(mu, beta, X);
    EXPECT_NO_THROW(validate_schedule(s, mu, beta, X, 500));
    EXPECT_DOUBLE_EQ(s(1), s.b / (1.0 + s.a));
  }
}

TEST(FedSgd, NoiselessSingleClientClosedForm) {
  // One client, σ = 0, X = 1: e_{t+1} = (1 − μφ_t) e_t, so Δ_t = Π(1 − μφ_τ)² Δ_1.
  const double mu = 0.8;
  Problem p{{client({1.5, -0.5}, {mu, mu}, 0.0, 1.0)}};
  RunOptions o;
  o.local_steps = 1;
  o.periods = 60;
  o.schedule = default_schedule(mu, mu, 1);
  o.replicas = 3;
  o.start = {4.0, 2.0};
  const auto tr = run_fedsgd(p, o);
  double prod = 1.0;
  const double delta1 = 2.5 * 2.5 + 2.5 * 2.5;
  EXPECT_NEAR(tr.delta1, delta1, 1e-12);
  for (const auto& st : tr.steps) {
    EXPECT_NEAR(st.delta, prod * prod * delta1, 1e-10);
    EXPECT_NEAR(st.delta_se, 0.0, 1e-14 * delta1);
    prod *= 1.0 - mu * o.schedule(st.t);
  }
  EXPECT_NEAR(tr.steps.back().next_delta, prod * prod * delta1, 1e-10);
  EXPECT_TRUE(check_theorem1(tr).all());
  EXPECT_TRUE(check_theorem2(tr).all());
}

TEST(FedSgd, AveragedIterateBookkeeping) {
  const auto p = make_instance({4, 3, Family::Anisotropic, 1.0, 2.0, 1.5, 1.0}, 3);
  const std::vector<double> start{1.0, -1.0, 0.5};
  FedSgd sgd(p, start);
  Rng rng(4);
  const std::size_t X = 3;
  for (std::size_t t = 1; t <= 12; ++t) {
    const auto st = sgd.step(t, 0.05, X, rng);
    EXPECT_EQ(st.aggregated, (t + 1) % X == 0);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(st.next_theta_bar[i], st.v_bar[i], 1e-14);
      EXPECT_NEAR(st.v_bar[i], st.theta_bar[i] - 0.05 * st.stochastic_mean[i], 1e-14);
    }
    if (st.aggregated) {
      for (const auto& th : sgd.thetas()) EXPECT_EQ(th, sgd.thetas().front());
    }
  }
}

TEST(FedSgd, ClientsDivergeBetweenAggregations) {
  const auto p = make_instance({3, 2, Family::Isotropic, 1.0, 1.0, 2.0, 0.0}, 5);
  const std::vector<double> start{0.0, 0.0};
  FedSgd sgd(p, start);
  Rng rng(1);
  sgd.step(1, 0.1, 4, rng);
  EXPECT_NE(sgd.thetas()[0], sgd.thetas()[1]);
}

TEST(FedSgd, ExactQuantizationMatchesPlainAveraging) {
  const auto p = make_instance({3, 3, Family::Isotropic, 1.0, 1.0, 1.0, 1.0}, 6);
  RunOptions o;
  o.local_steps = 2;
  o.periods = 10;
  o.schedule = default_schedule(1.0, 1.0, 2);
  o.replicas = 20;
  o.start.assign(3, 2.0);
  fedcompress::CompressOptions q;
  q.clusters = fedcompress::CompressOptions::kExact;
  o.quantize = q;
  const auto tr = run_fedsgd(p, o);
  ASSERT_TRUE(tr.quantized);
  for (const auto& st : tr.steps) EXPECT_NEAR(st.quantized_delta, st.delta, 1e-9 * (1.0 + st.delta));
}

TEST(FedSgd, CoarseQuantizationChangesTrajectory) {
  const auto p = make_instance({3, 3, Family::Isotropic, 1.0, 1.0, 1.0, 1.0}, 6);
  RunOptions o;
  o.local_steps = 2;
  o.periods = 10;
  o.schedule = default_schedule(1.0, 1.0, 2);
  o.replicas = 20;
  o.start.assign(3, 2.0);
  fedcompress::CompressOptions q;
  q.clusters = 1;
  o.quantize = q;
  const auto tr = run_fedsgd(p, o);
  EXPECT_NE(tr.steps.back().quantized_delta, tr.steps.back().delta);
}

TEST(FedSgd, DeterministicPerSeed) {
  const auto p = make_instance({3, 2, Family::Isotropic, 1.0, 1.0, 1.0, 1.0}, 2);
  RunOptions o;
  o.local_steps = 2;
  o.periods = 5;
  o.schedule = default_schedule(1.0, 1.0, 2);
  o.replicas = 16;
  o.seed = 4;
  const auto a = run_fedsgd(p, o), b = run_fedsgd(p, o);
  EXPECT_EQ(a.sq_error, b.sq_error);
  o.seed = 5;
  EXPECT_NE(run_fedsgd(p, o).sq_error, a.sq_error);
}

TEST(FedSgd, PreconditionsEnforced) {
  const auto p = make_instance({2, 2, Family::Isotropic, 1.0, 1.0, 1.0, 1.0}, 2);
  RunOptions o;
  o.local_steps = 4;
  o.periods = 5;
  o.schedule = {2.0, 1.0};  // X > 1 + a
  EXPECT_THROW(run_fedsgd(p, o), PreconditionError);
  o.check_preconditions = false;
  EXPECT_NO_THROW(run_fedsgd(p, o));
}

TEST(Theorems, HoldOnHeterogeneousInstances) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto p = make_instance({5, 3, Family::Anisotropic, 1.0, 2.0, 2.0, 1.0}, seed);
    RunOptions o;
    o.local_steps = 3;
    o.periods = 30;
    o.schedule = default_schedule(p.mu(), p.beta(), 3);
    o.replicas = 100;
    o.seed = seed;
    o.start.assign(3, 4.0);
    const auto tr = run_fedsgd(p, o);
    EXPECT_GT(tr.phi_gap, 0.0);
    EXPECT_TRUE(check_theorem1(tr).all());
    EXPECT_TRUE(check_theorem2(tr).all());
    EXPECT_EQ(tr.steps.size(), 90u);
    EXPECT_LT(tr.steps.back().delta, tr.delta1);
  }
}

TEST(Theorems, HalvedConstantIsCaught) {
  // Started at the optimum with X = 1 the one-step bound is nearly tight.
  const auto p = make_instance({5, 2, Family::Isotropic, 1.0, 1.0, 0.05, 1.0}, 7);
  RunOptions o;
  o.local_steps = 1;
  o.periods = 50;
  o.schedule = default_schedule(1.0, 1.0, 1);
  o.start = optimum(p).theta;
  const auto tr = run_fedsgd(p, o);
  EXPECT_GT(tr.phi_gap, 0.0);
  EXPECT_TRUE(check_theorem1(tr).all());
  const auto mutated = check_theorem1(tr, 0.5);
  EXPECT_GT(mutated.violations, 0u);
  EXPECT_GT(mutated.worst_margin, 0.0);
}

TEST(Theorems, StandardSweepShape) {
  const auto cases = standard_sweep(0, 20, 8);
  ASSERT_EQ(cases.size(), 12u);
  EXPECT_EQ(cases[0].spec.clients, 2u);
  EXPECT_EQ(cases[11].spec.clients, 10u);
  EXPECT_EQ(cases[11].options.local_steps, 10u);
  EXPECT_EQ(cases[1].spec.family, Family::Anisotropic);
  for (const auto& c : cases) EXPECT_NO_THROW(validate_schedule(c.options.schedule, c.problem.mu(), c.problem.beta(), c.options.local_steps, 20));
}

TEST(TraceCsv, Columns) {
  Problem p{{client({0.0}, {1.0}, 0.0, 1.0)}};
  RunOptions o;
  o.local_steps = 1;
  o.periods = 2;
  o.schedule = default_schedule(1.0, 1.0, 1);
  o.replicas = 2;
  o.start = {1.0};
  const auto tr = run_fedsgd(p, o);
  std::ostringstream out;
  write_trace_csv(out, tr);
  const auto s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,delta,theorem1_rhs,theorem2_bound");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}
