#include "sicca/erm.hpp"

#include "sicca/errors.hpp"

namespace sicca {

CcaSolution solve_erm_exact(const CovarianceTriple& cov, double ridge) {
  const WhitenedOperator op = whitened_operator(cov, ridge);
  const double gap = singular_gap(op);
  if (gap < 1e-10) {
    throw GapTooSmall("top singular pair is not separated: gap = " +
                      std::to_string(gap));
  }
  CcaSolution sol;
  sol.u = op.inv_sqrt_xx * op.left_vectors.col(0);
  sol.v = op.inv_sqrt_yy * op.right_vectors.col(0);
  sol.normalization = Normalization::EmpiricalUnit;
  sol.correlation_estimate = op.singular_values(0);
  return sol;
}

double erm_canonical_correlation(const CovarianceTriple& cov, double ridge) {
  const WhitenedOperator op = whitened_operator(cov, ridge);
  return op.singular_values.size() > 0 ? op.singular_values(0) : 0.0;
}

}  // namespace sicca
