#include "sicca/covariance.hpp"

#include <Eigen/SVD>

#include "sicca/errors.hpp"
#include "sicca/whitening.hpp"

namespace sicca {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

CovarianceTriple empirical_covariances(const Dataset& data) {
  const std::int64_t n = data.size();
  if (n < 1) {
    throw InsufficientSamples("empirical covariances need at least 1 sample");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  CovarianceTriple cov;
  cov.sxx = symmetrize(inv_n * (data.xs().transpose() * data.xs()));
  cov.syy = symmetrize(inv_n * (data.ys().transpose() * data.ys()));
  cov.sxy = inv_n * (data.xs().transpose() * data.ys());
  cov.centered = false;
  cov.n = n;
  return cov;
}

CovarianceTriple centered_covariances(const Dataset& data) {
  const std::int64_t n = data.size();
  if (n < 2) {
    throw InsufficientSamples("centered covariances need at least 2 samples");
  }
  const Eigen::RowVectorXd mean_x = data.xs().colwise().mean();
  const Eigen::RowVectorXd mean_y = data.ys().colwise().mean();
  const Eigen::MatrixXd cx = data.xs().rowwise() - mean_x;
  const Eigen::MatrixXd cy = data.ys().rowwise() - mean_y;
  const double inv = 1.0 / static_cast<double>(n - 1);
  CovarianceTriple cov;
  cov.sxx = symmetrize(inv * (cx.transpose() * cx));
  cov.syy = symmetrize(inv * (cy.transpose() * cy));
  cov.sxy = inv * (cx.transpose() * cy);
  cov.centered = true;
  cov.n = n;
  return cov;
}

ConcentrationReport concentration_error(const CovarianceTriple& population,
                                        const CovarianceTriple& estimate) {
  if (population.d_x() != estimate.d_x() ||
      population.d_y() != estimate.d_y()) {
    throw DimensionError("concentration_error: triples disagree on shape");
  }
  const Eigen::MatrixXd wx = spd_inv_sqrt(population.sxx);
  const Eigen::MatrixXd wy = spd_inv_sqrt(population.syy);
  const auto eye_x =
      Eigen::MatrixXd::Identity(population.d_x(), population.d_x());
  const auto eye_y =
      Eigen::MatrixXd::Identity(population.d_y(), population.d_y());

  ConcentrationReport rep;
  rep.nu_xx = spectral_norm(wx * estimate.sxx * wx - eye_x);
  rep.nu_yy = spectral_norm(wy * estimate.syy * wy - eye_y);
  rep.nu_xy = spectral_norm(wx * (estimate.sxy - population.sxy) * wy);
  rep.nu = std::max(rep.nu_xx, std::max(rep.nu_yy, rep.nu_xy));
  return rep;
}

}  // namespace sicca
