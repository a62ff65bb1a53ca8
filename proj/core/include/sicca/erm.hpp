#pragma once

#include "sicca/covariance.hpp"
#include "sicca/metrics.hpp"

namespace sicca {

// Exact top canonical pair of a covariance triple via dense factorization:
// whiten, take the leading singular pair of t_hat, and map back through the
// inverse square roots. The result is unit length in the empirical metric
// and carries sigma_1 as its correlation estimate.
//
// Throws SingularCovariance (through whitening) and GapTooSmall when
// sigma_1 - sigma_2 < 1e-10, in which case the leading pair is not uniquely
// determined.
CcaSolution solve_erm_exact(const CovarianceTriple& cov, double ridge = 0.0);

// Top empirical correlation sigma_1 alone; no gap requirement.
double erm_canonical_correlation(const CovarianceTriple& cov,
                                 double ridge = 0.0);

}  // namespace sicca
