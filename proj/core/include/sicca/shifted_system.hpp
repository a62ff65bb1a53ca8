#pragma once

#include <Eigen/Core>

#include "sicca/covariance.hpp"
#include "sicca/dataset.hpp"

namespace sicca {

/**
 * The shifted least-squares system used by the offline iterative solver.
 *
 * For a shift lambda above the top empirical correlation, the block matrix
 *
 *   A = [ lambda*Sxx   -Sxy      ]        B = [ Sxx   0   ]
 *       [ -Sxy^T        lambda*Syy ]          [ 0     Syy ]
 *
 * is positive definite, and one outer iteration maps w to the minimizer of
 * f(w) = w'Aw/2 - w'Bw_t. Per-sample gradient Lipschitz constants
 * L_i = (lambda+1)(|x_i|^2 + |y_i|^2) drive the importance-sampling weights
 * and step sizes of the stochastic inner solver.
 */
struct ShiftedSystem {
  double lambda = 0.0;
  const Dataset* data = nullptr;
  CovarianceTriple cov;

  Eigen::VectorXd lipschitz;      // L_i per sample
  Eigen::VectorXd weight_cdf;     // cumulative probabilities, p_i ~ L_i^2
  double max_lipschitz = 0.0;
  double mean_lipschitz = 0.0;
  double mean_sq_lipschitz = 0.0;

  // Conservative spectral surrogates for certification. rho1_ub is a caller
  // supplied upper estimate of the top empirical correlation; gamma_est is
  // the exact smallest eigenvalue across the auto blocks.
  double rho1_ub = 1.0;
  double gamma_est = 0.0;
  double block_norm = 0.0;
  double sigma_min_est = 0.0;
  double sigma_max_est = 0.0;

  int d_x() const { return static_cast<int>(cov.sxx.rows()); }
  int d_y() const { return static_cast<int>(cov.syy.rows()); }
  int dim() const { return d_x() + d_y(); }
  std::int64_t n() const { return data ? data->size() : 0; }
};

// Builds the system from a dataset and its (already computed) covariances.
// Requires lambda > rho1_ub; throws InvalidShift otherwise.
ShiftedSystem make_shifted_system(const Dataset& data, const CovarianceTriple& cov,
                                  double lambda, double rho1_ub);

// Covariance-only variant for exact-solve paths that never touch samples.
ShiftedSystem make_shifted_system(const CovarianceTriple& cov, double lambda,
                                  double rho1_ub);

// A*w through block products; never assembles the full matrix.
Eigen::VectorXd apply_A_lambda(const ShiftedSystem& sys, const Eigen::VectorXd& w);

// B*w for the block-diagonal auto-covariance.
Eigen::VectorXd apply_B(const CovarianceTriple& cov, const Eigen::VectorXd& w);

// f(w) = w'Aw/2 - w'Bw_t.
double least_squares_objective(const ShiftedSystem& sys, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& w_t);

// Optimal warm-start scale (w_t'Bw_t)/(w_t'Aw_t); throws DegenerateDirection
// when the denominator vanishes.
double warm_start_scale(const ShiftedSystem& sys, const Eigen::VectorXd& w_t);

// Mean squared Lipschitz constant over the exact squared smallest singular
// value of A (dense eigensolve; diagnostic only).
double kappa_diagnostic(const ShiftedSystem& sys);

// Dense assembly of A, for oracles and exact solves at desk scale.
Eigen::MatrixXd assemble_A_lambda(const CovarianceTriple& cov, double lambda);

inline Eigen::MatrixXd assemble_A_lambda(const ShiftedSystem& sys) {
  return assemble_A_lambda(sys.cov, sys.lambda);
}

// Dense assembly of B.
Eigen::MatrixXd assemble_B(const CovarianceTriple& cov);

}  // namespace sicca
