#include "sicca/shifted_system.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sicca/errors.hpp"

namespace sicca {

namespace {

void fill_spectral_surrogates(ShiftedSystem& sys) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(sys.cov.sxx,
                                                    Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(sys.cov.syy,
                                                    Eigen::EigenvaluesOnly);
  const double min_x = ex.eigenvalues().minCoeff();
  const double min_y = ey.eigenvalues().minCoeff();
  const double max_x = ex.eigenvalues().maxCoeff();
  const double max_y = ey.eigenvalues().maxCoeff();
  sys.gamma_est = std::min(min_x, min_y);
  sys.block_norm = std::max(max_x, max_y);
  if (sys.gamma_est <= 0.0) {
    throw SingularCovariance("shifted system needs positive definite auto blocks");
  }
  // The factor 1/2 keeps the lower bound sound even when rho1_ub is itself a
  // noisy estimate; it only costs the certifying solver extra epochs.
  sys.sigma_min_est = 0.5 * (sys.lambda - sys.rho1_ub) * sys.gamma_est;
  sys.sigma_max_est = (sys.lambda + 1.0) * sys.block_norm;
}

}  // namespace

ShiftedSystem make_shifted_system(const CovarianceTriple& cov, double lambda,
                                  double rho1_ub) {
  if (!(lambda > rho1_ub)) {
    throw InvalidShift("shift lambda must exceed the top correlation estimate");
  }
  ShiftedSystem sys;
  sys.lambda = lambda;
  sys.rho1_ub = rho1_ub;
  sys.cov = cov;
  fill_spectral_surrogates(sys);
  return sys;
}

ShiftedSystem make_shifted_system(const Dataset& data, const CovarianceTriple& cov,
                                  double lambda, double rho1_ub) {
  if (data.d_x() != cov.d_x() || data.d_y() != cov.d_y()) {
    throw DimensionError("dataset and covariance dimensions disagree");
  }
  ShiftedSystem sys = make_shifted_system(cov, lambda, rho1_ub);
  sys.data = &data;

  const int n = static_cast<int>(data.size());
  sys.lipschitz.resize(n);
  const Eigen::VectorXd sq =
      data.xs().rowwise().squaredNorm() + data.ys().rowwise().squaredNorm();
  sys.lipschitz = (lambda + 1.0) * sq;
  sys.max_lipschitz = sys.lipschitz.maxCoeff();
  sys.mean_lipschitz = sys.lipschitz.mean();
  sys.mean_sq_lipschitz = sys.lipschitz.squaredNorm() / n;

  sys.weight_cdf.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = sys.lipschitz[i] * sys.lipschitz[i];
    total += w;
    sys.weight_cdf[i] = total;
  }
  if (total <= 0.0) {
    // All-zero samples: fall back to uniform weights.
    for (int i = 0; i < n; ++i) {
      sys.weight_cdf[i] = static_cast<double>(i + 1) / n;
    }
  } else {
    sys.weight_cdf /= total;
  }
  sys.weight_cdf[n - 1] = 1.0;
  return sys;
}

Eigen::VectorXd apply_A_lambda(const ShiftedSystem& sys, const Eigen::VectorXd& w) {
  const int dx = sys.d_x();
  const int dy = sys.d_y();
  if (w.size() != dx + dy) throw DimensionError("apply_A_lambda: bad vector size");
  Eigen::VectorXd out(dx + dy);
  out.head(dx) = sys.lambda * (sys.cov.sxx * w.head(dx)) - sys.cov.sxy * w.tail(dy);
  out.tail(dy) =
      sys.lambda * (sys.cov.syy * w.tail(dy)) - sys.cov.sxy.transpose() * w.head(dx);
  return out;
}

Eigen::VectorXd apply_B(const CovarianceTriple& cov, const Eigen::VectorXd& w) {
  const int dx = cov.d_x();
  const int dy = cov.d_y();
  if (w.size() != dx + dy) throw DimensionError("apply_B: bad vector size");
  Eigen::VectorXd out(dx + dy);
  out.head(dx) = cov.sxx * w.head(dx);
  out.tail(dy) = cov.syy * w.tail(dy);
  return out;
}

double least_squares_objective(const ShiftedSystem& sys, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& w_t) {
  return 0.5 * w.dot(apply_A_lambda(sys, w)) - w.dot(apply_B(sys.cov, w_t));
}

double warm_start_scale(const ShiftedSystem& sys, const Eigen::VectorXd& w_t) {
  const double den = w_t.dot(apply_A_lambda(sys, w_t));
  if (std::abs(den) < 1e-300) {
    throw DegenerateDirection("warm_start_scale: w'Aw vanished");
  }
  return w_t.dot(apply_B(sys.cov, w_t)) / den;
}

Eigen::MatrixXd assemble_A_lambda(const CovarianceTriple& cov, double lambda) {
  const int dx = cov.d_x();
  const int dy = cov.d_y();
  Eigen::MatrixXd a(dx + dy, dx + dy);
  a.topLeftCorner(dx, dx) = lambda * cov.sxx;
  a.topRightCorner(dx, dy) = -cov.sxy;
  a.bottomLeftCorner(dy, dx) = -cov.sxy.transpose();
  a.bottomRightCorner(dy, dy) = lambda * cov.syy;
  return a;
}

Eigen::MatrixXd assemble_B(const CovarianceTriple& cov) {
  const int dx = cov.d_x();
  const int dy = cov.d_y();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  b.topLeftCorner(dx, dx) = cov.sxx;
  b.bottomRightCorner(dy, dy) = cov.syy;
  return b;
}

double kappa_diagnostic(const ShiftedSystem& sys) {
  if (sys.lipschitz.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_A_lambda(sys),
                                                    Eigen::EigenvaluesOnly);
  const double smin = es.eigenvalues().minCoeff();
  return sys.mean_sq_lipschitz / (smin * smin);
}

}  // namespace sicca
