#pragma once

#include <Eigen/Dense>
#include <optional>

#include "sicca/covariance.hpp"
#include "sicca/whitening.hpp"

namespace sicca {

// Which geometry a solution's directions are unit-length in, if any.
enum class Normalization { EmpiricalUnit, PopulationUnit, Unnormalized };

// A candidate canonical pair. Directions are column vectors; the optional
// correlation estimate is whatever the producing solver measured.
struct CcaSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Normalization normalization = Normalization::Unnormalized;
  std::optional<double> correlation_estimate;
};

// Spectral quantities that control solver difficulty.
struct ProblemConditioning {
  double rho1 = 0.0;   // top correlation
  double gap = 0.0;    // sigma_1 - sigma_2 of the whitened operator
  double gamma = 0.0;  // smallest eigenvalue across the auto blocks
};

// Mean cosine of the candidate against the reference in the metric induced
// by the auto blocks:
//
//   align = (u' Sxx u* / (|u|_Sxx |u*|_Sxx) + v' Syy v* / (|v|_Syy |v*|_Syy)) / 2
//
// Scale-invariant in both arguments; at most 1. Throws DegenerateDirection
// if any direction has metric norm below 1e-14. Only multiplications by the
// covariance blocks are used, never inverses.
double align(const CcaSolution& candidate, const CcaSolution& reference,
             const CovarianceTriple& cov);

// Achieved correlation u' Sxy v / (|u|_Sxx |v|_Syy).
double correlation_ratio(const CcaSolution& candidate,
                         const CovarianceTriple& cov);

// Whitened-sum cosine used by the streaming transfer argument:
//
//   (u*' Sxx u + v*' Syy v) / (sqrt(2) * sqrt(u' Sxx u + v' Syy v))
//
// assuming the reference pair is unit length in the same metric.
double joint_alignment(const CcaSolution& candidate,
                       const CcaSolution& reference,
                       const CovarianceTriple& cov);

// sigma_1 - sigma_2, treating a rank-one operator as having sigma_2 = 0.
double singular_gap(const WhitenedOperator& op);

// Collects (rho1, gap, gamma) for a whitened operator and its covariance.
ProblemConditioning conditioning_of(const WhitenedOperator& op,
                                    const CovarianceTriple& cov);

}  // namespace sicca
