#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "sicca/covariance.hpp"
#include "sicca/dataset.hpp"
#include "sicca/metrics.hpp"
#include "sicca/svrg.hpp"

namespace sicca {

/**
 * Configuration for the offline shift-and-invert solver. eta is the target
 * alignment error of the returned pair; l and u bound the accepted distance
 * of the shift above the top correlation in units of the empirical gap;
 * c_shift is the contraction factor of the shift locator. exact_inner swaps
 * the stochastic inner solver for dense factorizations, and
 * collect_diagnostics attaches a dense spectral view to every iterate; both
 * are meant for small-dimension verification runs only.
 */
struct OfflineParams {
  double eta = 1e-3;
  double l = 0.25;
  double u = 0.75;
  double c_shift = 0.5;
  int max_outer = 200;
  int locate_rounds = 32;
  SvrgOptions inner;
  bool exact_inner = false;
  bool collect_diagnostics = false;
  bool early_exit = true;
  std::optional<Eigen::VectorXd> init;
  std::optional<double> lambda_override;
  std::optional<double> rho1_hint;
};

struct ShiftCertificate {
  double lambda = 0.0;
  double rho1_est = 0.0;   // estimate of the top empirical correlation
  double delta_est = 0.0;  // estimate of the empirical gap
  int rounds = 0;
};

// Dense eigendecomposition of the shifted-inverse operator in the
// B^{1/2}-transformed coordinates; eigenvalues descend.
struct SpectralProbe {
  Eigen::VectorXd betas;
  Eigen::MatrixXd vectors;
  Eigen::MatrixXd b_half;
};

struct SpectralView {
  Eigen::VectorXd beta;
  Eigen::VectorXd xi;  // coefficients of the normalized residual, unit norm
  double potential = 0.0;
};

struct IterateState {
  Eigen::VectorXd w;
  int t = 0;
  double alpha_star = 0.0;
  std::optional<SpectralView> diagnostics;
};

struct OfflineTrace {
  ShiftCertificate shift;
  std::vector<IterateState> iterates;  // visited iterates, final one included
  int outer_iters = 0;
  int inner_uncertified = 0;
  bool early_exit = false;
};

// True when lambda sits inside [rho1 + l*delta, rho1 + u*delta] with a
// delta/8 safety margin on both edges.
bool shift_certificate_holds(double lambda, double rho1, double delta, double l,
                             double u);

/**
 * Finds a shift with certificate lambda - rho1 in [l, u] times the gap.
 * Starts at 1 + gap-estimate (always valid) and contracts towards the top
 * correlation, re-estimating it each round through inverse power iterations
 * whose solves are dense when data is null and stochastic otherwise.
 * Throws GapTooSmall below gap 1e-6 and BracketFailure when the round budget
 * runs out.
 */
ShiftCertificate locate_shift(const CovarianceTriple& cov, const Dataset* data,
                              const OfflineParams& params, std::uint64_t seed);

// Builds the dense spectral view at the given shift (throws InvalidShift when
// the shifted matrix is not positive definite).
SpectralProbe make_spectral_probe(const CovarianceTriple& cov, double lambda);

// Potential of a residual r in transformed coordinates: the ratio of
// inverse-eigenvalue-weighted masses perpendicular and parallel to the top
// eigenvector. Returns +infinity when the parallel component vanishes.
double potential_G(const SpectralProbe& probe, const Eigen::VectorXd& r);

/**
 * Offline solver: locates a shift, then runs a fixed number of inexact
 * inverse-power iterations with warm-started inner solves whose accuracy
 * ratio follows 64*max(1, G-model), and normalizes the result per block
 * against the empirical covariances. The iterate is never normalized inside
 * the loop. An optional trace collects per-iterate states.
 */
CcaSolution offline_si_cca(const Dataset& data, const OfflineParams& params,
                           std::uint64_t seed, OfflineTrace* trace = nullptr);

}  // namespace sicca
