#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "sicca/metrics.hpp"
#include "sicca/stream.hpp"

namespace sicca {

/**
 * Schedule constants and conditioning inputs of the streaming inner solver.
 * Derived quantities per epoch tau (1-based):
 *   m_tau = ceil(S / (c2^2 mu))            epoch length cap
 *   k_tau = max(ceil(S / (c2 mu)),
 *               ceil(sigma_sq 2^{tau-1} / (c3_init beta1_r_sq)))
 * with beta1_r_sq supplied by the enclosing linear system.
 */
struct StreamingConfig {
  double s = 1.0 / 352.0;  // step constant, fixed
  double mu = 0.0;
  double S = 0.0;
  double sigma_sq = 0.0;
  double gamma_lb = 1e-3;
  double c2 = 1.0 / 44.0;
  double c3_init = 1.0 / 20.0;
  int Gamma = 0;  // epoch count; 0 derives ceil(log2(1/eta_t))
};

// One least-squares system of the outer iteration: minimize over w the
// quadratic with curvature block [[l xx', -xy'], [-yx', l yy']] coupled to
// the previous iterate w_t through the second-moment blocks.
struct StreamingLsProblem {
  double lambda = 0.0;
  Eigen::VectorXd w_t;
  double beta1_r_sq = 0.0;  // scale of the initial suboptimality bound
};

// Single-sample gradient at w; rank-one products only, O(d) time and space.
Eigen::VectorXd stochastic_gradient(const StreamingLsProblem& prob,
                                    const Eigen::VectorXd& w,
                                    const SamplePair& pair);

struct EpochLedger {
  std::int64_t batch_draws = 0;  // k_tau
  std::int64_t steps = 0;        // realized m~_tau
};

struct StreamingSvrgResult {
  Eigen::VectorXd w;
  std::uint64_t samples_used = 0;
  std::vector<EpochLedger> epochs;
};

/**
 * Variance-reduced streaming solver for one StreamingLsProblem. Starts at
 * w = 0; each epoch draws k_tau fresh samples for an anchored batch
 * gradient, then a uniformly drawn number of steps in {1..m_tau} with step
 * size s/S, every gradient estimated from a fresh sample. Consumes the
 * stream strictly in order.
 */
StreamingSvrgResult streaming_svrg(const StreamingLsProblem& prob,
                                   SampleStream& stream,
                                   const StreamingConfig& cfg, double eta_t,
                                   std::uint64_t seed);

enum class TailClass { SubGaussian, Bounded };

// Conditioning numbers of one shifted system, scale-free in the residual:
// sigma_sq_unit is the gradient-noise figure per unit ||r_t||^2.
struct ConditioningEstimates {
  double mu = 0.0;
  double S = 0.0;
  double sigma_sq_unit = 0.0;
  double gamma_est = 0.0;
  double rho1_est = 0.0;
  double beta1 = 0.0;
  double m2 = 0.0;  // mean of ||x||^2 + ||y||^2
};

// Closed-form conditioning from known moments (constant 1 in every bound).
ConditioningEstimates conditioning_from_moments(double gamma, double rho1,
                                                double m2, double lambda,
                                                TailClass tail);

// Frozen pilot draw kept as raw samples, so quadratic forms in the pilot
// second-moment metric cost O(n d) without materializing d x d blocks.
struct Pilot {
  Eigen::MatrixXd xs;
  Eigen::MatrixXd ys;

  std::int64_t n() const { return xs.rows(); }
};

Pilot draw_pilot(SampleStream& stream, std::int64_t count);

// w' B_pilot w with B_pilot the uncentered pilot second-moment blocks.
double pilot_b_quadratic(const Pilot& pilot, const Eigen::VectorXd& w);

struct ConditioningOptions {
  double gamma_lb = 1e-3;
  TailClass tail = TailClass::SubGaussian;
  std::optional<double> rho1_hint;
};

/**
 * Measured conditioning from a pilot: gamma from the smallest eigenvalue of
 * the pilot auto blocks (floored at gamma_lb, and skipped entirely when the
 * pilot is rank deficient), rho1 from the pilot canonical correlation unless
 * a hint pins it, and the scale parameters from the tail-class forms times
 * the measured second moment. Requires at least 100 pilot samples.
 */
ConditioningEstimates estimate_conditioning(const Pilot& pilot, double lambda,
                                            const ConditioningOptions& opt);

struct StreamingParams {
  double epsilon = 0.1;
  double lambda = 0.0;         // required; must exceed the top correlation
  std::int64_t pilot_count = 0;  // 0: 2000 (d_x + d_y), clamped to [100, 20000]
  double gamma_lb = 1e-3;
  double safety = 1.0;  // multiplies S and sigma_sq
  int max_outer = 200;
  int gamma_epochs = 0;  // per-system epoch override; 0 derives from eta_t
  TailClass tail = TailClass::SubGaussian;
  std::optional<double> rho1_hint;
};

struct StreamingSystemLedger {
  double eta_t = 0.0;
  std::uint64_t samples = 0;
  std::vector<EpochLedger> epochs;
};

struct StreamingReport {
  CcaSolution solution;  // Unnormalized; callers rescale with metrics
  std::uint64_t samples_used = 0;  // total stream draws incl. the pilot
  std::uint64_t pilot_samples = 0;
  std::uint64_t epoch_samples = 0;
  int outer_iters = 0;
  double g0_est = 0.0;
  double rho1_est = 0.0;
  std::vector<StreamingSystemLedger> systems;
};

/**
 * One-pass shift-and-invert solver. Draws a pilot for conditioning and the
 * residual-scale metric, then runs a fixed schedule of streaming least
 * squares systems whose accuracy targets tighten geometrically once the
 * estimated potential drops below one. Solver state stays O(d).
 */
StreamingReport streaming_si_cca(SampleStream& stream,
                                 const StreamingParams& params,
                                 std::uint64_t seed);

}  // namespace sicca
