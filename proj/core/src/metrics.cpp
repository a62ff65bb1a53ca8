#include "sicca/metrics.hpp"

#include <cmath>

#include "sicca/errors.hpp"

namespace sicca {

namespace {

constexpr double kNormFloor = 1e-14;

double metric_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& s,
                   const char* what) {
  if (v.size() != s.rows()) {
    throw DimensionError(std::string(what) +
                         ": direction does not match covariance block");
  }
  const double sq = v.dot(s * v);
  const double norm = std::sqrt(std::max(sq, 0.0));
  if (norm < kNormFloor) {
    throw DegenerateDirection(std::string(what) +
                              ": direction has (near) zero metric norm");
  }
  return norm;
}

}  // namespace

double align(const CcaSolution& candidate, const CcaSolution& reference,
             const CovarianceTriple& cov) {
  const double nu = metric_norm(candidate.u, cov.sxx, "align/u");
  const double nv = metric_norm(candidate.v, cov.syy, "align/v");
  const double nu_ref = metric_norm(reference.u, cov.sxx, "align/u_ref");
  const double nv_ref = metric_norm(reference.v, cov.syy, "align/v_ref");
  const double cos_u = candidate.u.dot(cov.sxx * reference.u) / (nu * nu_ref);
  const double cos_v = candidate.v.dot(cov.syy * reference.v) / (nv * nv_ref);
  return 0.5 * (cos_u + cos_v);
}

double correlation_ratio(const CcaSolution& candidate,
                         const CovarianceTriple& cov) {
  const double nu = metric_norm(candidate.u, cov.sxx, "correlation_ratio/u");
  const double nv = metric_norm(candidate.v, cov.syy, "correlation_ratio/v");
  return candidate.u.dot(cov.sxy * candidate.v) / (nu * nv);
}

double joint_alignment(const CcaSolution& candidate,
                       const CcaSolution& reference,
                       const CovarianceTriple& cov) {
  const double nu2 = candidate.u.dot(cov.sxx * candidate.u);
  const double nv2 = candidate.v.dot(cov.syy * candidate.v);
  const double joint = std::sqrt(std::max(nu2 + nv2, 0.0));
  if (joint < kNormFloor) {
    throw DegenerateDirection("joint_alignment: candidate is (near) zero");
  }
  metric_norm(reference.u, cov.sxx, "joint_alignment/u_ref");
  metric_norm(reference.v, cov.syy, "joint_alignment/v_ref");
  const double num =
      reference.u.dot(cov.sxx * candidate.u) +
      reference.v.dot(cov.syy * candidate.v);
  return num / (std::sqrt(2.0) * joint);
}

double singular_gap(const WhitenedOperator& op) {
  if (op.singular_values.size() == 0) {
    throw DimensionError("singular_gap: empty operator");
  }
  const double s1 = op.singular_values(0);
  const double s2 = op.singular_values.size() > 1 ? op.singular_values(1) : 0.0;
  return s1 - s2;
}

ProblemConditioning conditioning_of(const WhitenedOperator& op,
                                    const CovarianceTriple& cov) {
  ProblemConditioning pc;
  pc.rho1 = op.singular_values.size() > 0 ? op.singular_values(0) : 0.0;
  pc.gap = singular_gap(op);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(cov.sxx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(cov.syy);
  pc.gamma = std::min(ex.eigenvalues().minCoeff(), ey.eigenvalues().minCoeff());
  return pc;
}

}  // namespace sicca
