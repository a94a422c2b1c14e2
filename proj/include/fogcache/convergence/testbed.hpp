#pragma once

// Strongly convex federated-SGD testbed for the two convergence bounds.
//
// Every client holds a diagonal quadratic f_n(θ) = ½ Σ_i a_{n,i} (θ_i − c_{n,i})²,
// so μ, β, θ*, f_n* = 0 and the heterogeneity gap Φ are known in closed form.
// Stochastic gradients add zero-mean noise truncated at ±6 standard deviations
// and rescaled so that E‖ξ‖² = σ_n² exactly.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fogcache/fedcompress/update.hpp"
#include "fogcache/federation/federation.hpp"
#include "fogcache/rng.hpp"

namespace fogcache::convergence {

/// A step-size schedule or instance outside the theorems' hypotheses.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct QuadraticClient {
  std::vector<double> center;     // c_n
  std::vector<double> curvature;  // diagonal of the Hessian, all > 0
  double noise_std = 0.0;         // σ_n, the norm-level standard deviation
  double weight = 0.0;            // p_n

  std::size_t dim() const { return center.size(); }
  double value(std::span<const double> theta) const;
  /// Exact gradient into `out`.
  void gradient(std::span<const double> theta, std::span<double> out) const;
};

struct Problem {
  std::vector<QuadraticClient> clients;

  std::size_t dim() const { return clients.empty() ? 0 : clients.front().dim(); }
  /// Smallest and largest curvature over all clients and coordinates.
  double mu() const;
  double beta() const;
  /// Σ p_n² σ_n².
  double weighted_noise() const;
  /// Throws std::invalid_argument on empty, ragged or non-positive data, or
  /// weights that do not sum to 1 within 1e-9.
  void validate() const;
};

struct Optimum {
  std::vector<double> theta;  // θ*
  double phi = 0.0;           // Φ = f(θ*) − Σ p_n f_n*, with f_n* = 0
};

/// Closed-form minimizer of f = Σ p_n f_n: coordinate-wise the curvature-
/// and weight-averaged center.
Optimum optimum(const Problem& problem);

/// Standard deviation of N(0, 1) truncated to [−6, 6].
double truncated_normal_std();

/// Zero-mean noise with E‖ξ‖² = σ²: each coordinate is a truncated normal
/// scaled to variance σ²/d.
void draw_noise(Rng& rng, double sigma, std::span<double> out);

/// Checks the hypotheses of the decay bound for explicit step sizes
/// φ_1..φ_T: strictly decreasing, φ_1 ≤ min(1/μ, 1/(4β)) and
/// φ_t ≤ 2 φ_{t+X}. Throws PreconditionError naming the first violation.
void validate_step_sizes(std::span<const double> phi, double mu, double beta, std::size_t X);

/// Checks b > 1/μ and a > 0, then validate_step_sizes over T steps.
void validate_schedule(const federation::StepSchedule& s, double mu, double beta, std::size_t X,
                       std::size_t T);

/// b = 2/μ and the smallest a satisfying every hypothesis.
federation::StepSchedule default_schedule(double mu, double beta, std::size_t X);

/// Iterates of one noise replica. Clients start from a common θ_1; at step t
/// each computes v^n_{t+1} = θ^n_t − φ_t ∇f_n(θ^n_t, ξ^n_t), and when t+1 is a
/// multiple of X every θ^n_{t+1} becomes Σ p_n v^n_{t+1}.
///
/// With `quantize` set, aggregation instead adds Σ p_n decode(Q(v^n − θ_a)) to
/// the previous aggregate θ_a.
class FedSgd {
 public:
  FedSgd(const Problem& problem, std::span<const double> start,
         const fedcompress::CompressOptions* quantize = nullptr);

  struct Step {
    std::vector<double> theta_bar;       // θ̄_t, before the step
    std::vector<double> stochastic_mean; // g_t = Σ p_n ∇f_n(θ^n_t, ξ^n_t)
    std::vector<double> v_bar;           // v̄_{t+1}
    std::vector<double> next_theta_bar;  // θ̄_{t+1}
    bool aggregated = false;
  };

  /// Advances from t to t+1 drawing noise from `rng` (clients in order).
  /// `grad_sq`, when non-empty, receives ‖∇f_n(θ^n_t)‖² per client.
  Step step(std::size_t t, double phi, std::size_t X, Rng& rng, std::span<double> grad_sq = {});

  const std::vector<std::vector<double>>& thetas() const { return theta_; }
  std::vector<double> theta_bar() const;

 private:
  const Problem& problem_;
  const fedcompress::CompressOptions* quantize_;
  std::vector<std::vector<double>> theta_;
  std::vector<double> anchor_;
};

struct RunOptions {
  std::size_t local_steps = 5;  // X
  std::size_t periods = 40;     // Y; the run has X·Y steps
  federation::StepSchedule schedule;
  std::size_t replicas = 200;
  std::uint64_t seed = 0;
  std::vector<double> start;    // θ_1; zeros when empty
  bool check_preconditions = true;
  /// When set, a second pass aggregates k-means-coded deltas with the same
  /// noise. It is recorded for comparison only.
  std::optional<fedcompress::CompressOptions> quantize;
};

struct TheoremStep {
  std::size_t t = 0;
  double phi = 0.0;
  double delta = 0.0;           // Δ_t = E‖θ̄_t − θ*‖²
  double delta_se = 0.0;
  double next_delta = 0.0;      // E‖v̄_{t+1} − θ*‖²
  double theorem1_rhs = 0.0;    // (1 − μφ_t)Δ_t + φ_t² H
  double theorem2_bound = 0.0;  // ρ / (a + t)
  bool aggregated = false;      // t+1 is a multiple of X
  double quantized_delta = 0.0; // quantized pass; 0 without one
};

struct TheoremTrace {
  double mu = 0.0;
  double beta = 0.0;
  double phi_gap = 0.0;          // Φ
  double weighted_noise = 0.0;   // Σ p_n² σ_n²
  double gradient_bound_sq = 0.0; // G²
  double H = 0.0;
  double rho = 0.0;
  double delta1 = 0.0;
  std::size_t local_steps = 0;
  std::size_t replicas = 0;
  federation::StepSchedule schedule;
  bool quantized = false;
  std::vector<TheoremStep> steps;
  // Per-replica squared errors ‖θ̄_t − θ*‖², t = 1..T+1, row-major by t.
  std::vector<double> sq_error;

  double sq_error_at(std::size_t t, std::size_t r) const { return sq_error[(t - 1) * replicas + r]; }
};

/// H = Σ p_n² σ_n² + 6βΦ + 8(X − 1)² G².
double theorem1_constant(double weighted_noise, double beta, double phi_gap, std::size_t X,
                         double gradient_bound_sq);

/// ρ = max{b² H / (bμ − 1), (a + 1) Δ_1}.
double theorem2_constant(const federation::StepSchedule& s, double mu, double H, double delta1);

/// Runs every replica (in parallel; each replica r draws from its own stream
/// derived from the seed) and records both theorem sides.
///
/// G² is the largest estimated E‖∇f_n(θ^n_t, ξ)‖² over steps and clients:
/// the replica mean of ‖∇f_n(θ^n_t)‖² plus σ_n², the exact noise
/// contribution.
TheoremTrace run_fedsgd(const Problem& problem, const RunOptions& options);

struct CheckReport {
  std::vector<bool> holds;   // one entry per recorded step
  std::size_t violations = 0;
  // Largest lhs − rhs − tolerance over the steps; positive exactly when a
  // step fails.
  double worst_margin = 0.0;

  bool all() const { return violations == 0; }
};

/// E‖v̄_{t+1} − θ*‖² ≤ (1 − μφ_t)Δ_t + φ_t² (h_factor·H) at every step, tested
/// on the paired per-replica difference: a step fails when its mean exceeds
/// `tolerance_se` standard errors.
CheckReport check_theorem1(const TheoremTrace& trace, double h_factor = 1.0,
                           double tolerance_se = 3.0);

/// Δ_t ≤ ρ/(a + t) at every recorded step within `tolerance_se` standard errors.
CheckReport check_theorem2(const TheoremTrace& trace, double tolerance_se = 3.0);

/// Columns t, delta, theorem1_rhs, theorem2_bound, plus quantized_delta when
/// the trace has a quantized pass.
void write_trace_csv(std::ostream& out, const TheoremTrace& trace);

enum class Family { Isotropic, Anisotropic };

struct InstanceSpec {
  std::size_t clients = 5;
  std::size_t dim = 2;
  Family family = Family::Isotropic;
  double mu = 1.0;
  double beta = 1.0;           // anisotropic: curvatures drawn in [mu, beta]
  double center_spread = 1.0;  // std-dev of the client centers
  double noise = 1.0;          // σ_n drawn in [0.5, 1.5]·noise
};

/// Seeded random instance. Every client shares one curvature vector; the
/// anisotropic family pins its extremes to μ and β.
Problem make_instance(const InstanceSpec& spec, std::uint64_t seed);

struct SweepCase {
  std::size_t index = 0;
  InstanceSpec spec;
  Problem problem;
  RunOptions options;
};

/// The standard grid N ∈ {2, 5, 10} × X ∈ {1, 2, 5, 10}: three dimensions,
/// alternating isotropic and anisotropic (β = 2) instances, centers spread 2,
/// unit noise, every client starting at 5·1, and `steps` steps rounded down
/// to whole periods with the default schedule.
std::vector<SweepCase> standard_sweep(std::uint64_t seed, std::size_t steps = 200,
                                      std::size_t replicas = 200);

struct SweepResult {
  const SweepCase* instance = nullptr;
  TheoremTrace trace;
  CheckReport theorem1;
  CheckReport theorem2;
};

/// Columns instance, clients, local_steps, family, t, phi, delta, delta_se,
/// next_delta, theorem1_rhs, theorem2_bound, theorem1_holds, theorem2_holds.
void write_sweep_csv(std::ostream& out, std::span<const SweepResult> results);

}  // namespace fogcache::convergence
