#include "sicca/whitening.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sicca/errors.hpp"

namespace sicca {

namespace {

// Shared eigendecomposition path for both square roots. `invert` flips the
// exponent; eigenvalues at or below the floor either throw or clamp to zero.
Eigen::MatrixXd spd_power_half(const Eigen::MatrixXd& m, double floor,
                               bool invert) {
  if (m.rows() != m.cols()) {
    throw DimensionError("matrix square root needs a square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw SingularCovariance("eigendecomposition failed");
  }
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) <= floor) {
      if (invert) {
        throw SingularCovariance(
            "covariance block is singular: eigenvalue " +
            std::to_string(vals(i)) + " at or below floor " +
            std::to_string(floor));
      }
      vals(i) = 0.0;
    } else {
      vals(i) = invert ? 1.0 / std::sqrt(vals(i)) : std::sqrt(vals(i));
    }
  }
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double floor) {
  return spd_power_half(m, floor, false);
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m, double floor) {
  return spd_power_half(m, floor, true);
}

WhitenedOperator whitened_operator(const CovarianceTriple& cov, double ridge) {
  if (cov.sxx.rows() != cov.sxy.rows() || cov.syy.rows() != cov.sxy.cols()) {
    throw DimensionError("covariance blocks disagree on dimensions");
  }
  if (ridge < 0.0) {
    throw ConfigError("ridge must be nonnegative");
  }
  const int d_x = cov.d_x();
  const int d_y = cov.d_y();
  Eigen::MatrixXd sxx = cov.sxx;
  Eigen::MatrixXd syy = cov.syy;
  if (ridge > 0.0) {
    sxx += ridge * Eigen::MatrixXd::Identity(d_x, d_x);
    syy += ridge * Eigen::MatrixXd::Identity(d_y, d_y);
  }

  WhitenedOperator op;
  op.inv_sqrt_xx = spd_inv_sqrt(sxx);
  op.inv_sqrt_yy = spd_inv_sqrt(syy);
  op.t_hat = op.inv_sqrt_xx * cov.sxy * op.inv_sqrt_yy;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      op.t_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  op.singular_values = svd.singularValues();
  op.left_vectors = svd.matrixU();
  op.right_vectors = svd.matrixV();

  if (op.singular_values.size() > 0 &&
      op.singular_values(0) > 1.0 + 1e-8) {
    throw InvalidModel(
        "whitened operator has singular value " +
        std::to_string(op.singular_values(0)) +
        " > 1; the blocks cannot come from one joint distribution");
  }

  // Deterministic sign convention: the largest-magnitude entry of each left
  // vector is positive, ties broken by the lowest index. The paired right
  // vector flips together with it so t_hat is unchanged.
  for (Eigen::Index k = 0; k < op.left_vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < op.left_vectors.rows(); ++i) {
      const double mag = std::abs(op.left_vectors(i, k));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (op.left_vectors(arg, k) < 0.0) {
      op.left_vectors.col(k) = -op.left_vectors.col(k);
      op.right_vectors.col(k) = -op.right_vectors.col(k);
    }
  }
  return op;
}

SymmetricEmbedding symmetric_embedding(const WhitenedOperator& op) {
  const int d_x = static_cast<int>(op.t_hat.rows());
  const int d_y = static_cast<int>(op.t_hat.cols());
  SymmetricEmbedding emb;
  emb.d_x = d_x;
  emb.d_y = d_y;
  emb.c = Eigen::MatrixXd::Zero(d_x + d_y, d_x + d_y);
  emb.c.topRightCorner(d_x, d_y) = op.t_hat;
  emb.c.bottomLeftCorner(d_y, d_x) = op.t_hat.transpose();
  return emb;
}

}  // namespace sicca
