#pragma once

#include <Eigen/Dense>

#include "sicca/covariance.hpp"

namespace sicca {

/**
 * Whitened cross-correlation operator t_hat = sxx^{-1/2} sxy syy^{-1/2}
 * together with its thin SVD and the inverse square roots used to map
 * whitened singular vectors back to canonical directions.
 *
 * Singular values are sorted in decreasing order and lie in [0, 1 + 1e-8]
 * for any genuine covariance triple. Each left vector is sign-fixed so its
 * largest-magnitude entry is positive (ties broken by lowest index), and the
 * paired right vector is flipped along with it.
 */
struct WhitenedOperator {
  Eigen::MatrixXd t_hat;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd left_vectors;   // columns a_i, d_x of them at most
  Eigen::MatrixXd right_vectors;  // columns b_i
  Eigen::MatrixXd inv_sqrt_xx;
  Eigen::MatrixXd inv_sqrt_yy;
};

/**
 * Symmetric embedding of t_hat with zero diagonal blocks:
 *
 *   c = [ 0       t_hat ]
 *       [ t_hat'  0     ]
 *
 * Its spectrum is {+sigma_i, -sigma_i, 0...} and the top eigenvector is
 * (a_1; b_1) / sqrt(2).
 */
struct SymmetricEmbedding {
  Eigen::MatrixXd c;
  int d_x = 0;
  int d_y = 0;
};

// Symmetric positive-definite square root via eigendecomposition. Eigenvalues
// below `floor` raise SingularCovariance when `invert` is set; otherwise they
// are clamped to zero.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double floor = 1e-12);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m, double floor = 1e-12);

// Builds the whitened operator from covariance blocks, optionally adding
// ridge * I to the auto blocks first. Throws SingularCovariance if an auto
// block is singular after the ridge, InvalidModel if a singular value exceeds
// 1 + 1e-8 (the triple cannot come from a joint distribution).
WhitenedOperator whitened_operator(const CovarianceTriple& cov,
                                   double ridge = 0.0);

SymmetricEmbedding symmetric_embedding(const WhitenedOperator& op);

}  // namespace sicca
