#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sicca/dataset.hpp"

namespace sicca {

/**
 * Second-moment blocks (sxx, sxy, syy) of a paired sample or population.
 *
 * Auto blocks are kept exactly symmetric by construction; `centered` records
 * whether means were subtracted (divisor n - 1) or not (divisor n).
 */
struct CovarianceTriple {
  Eigen::MatrixXd sxx;
  Eigen::MatrixXd sxy;
  Eigen::MatrixXd syy;
  bool centered = false;
  std::int64_t n = 0;

  int d_x() const { return static_cast<int>(sxx.rows()); }
  int d_y() const { return static_cast<int>(syy.rows()); }
};

// Relative spectral-norm deviations of an estimated triple from a reference
// population triple, measured in the population's whitened geometry.
struct ConcentrationReport {
  double nu_xx = 0.0;
  double nu_yy = 0.0;
  double nu_xy = 0.0;
  double nu = 0.0;  // max of the three
};

// Uncentered second moments with divisor n; throws InsufficientSamples on an
// empty dataset. Accumulation order is fixed, so results are deterministic.
CovarianceTriple empirical_covariances(const Dataset& data);

// Centered covariances with divisor n - 1; requires n >= 2.
CovarianceTriple centered_covariances(const Dataset& data);

// nu_xx = ||Sxx^{-1/2} hat_Sxx Sxx^{-1/2} - I||_2 and likewise for the other
// blocks; norms via dense SVD. Throws SingularCovariance if the reference
// auto blocks cannot be whitened.
ConcentrationReport concentration_error(const CovarianceTriple& population,
                                        const CovarianceTriple& estimate);

}  // namespace sicca
