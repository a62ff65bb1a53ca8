#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "sicca/errors.hpp"
#include "sicca/rng.hpp"
#include "sicca/whitening.hpp"

using namespace sicca;

namespace {

Eigen::MatrixXd random_spd(int d, std::uint64_t seed, double eig_lo, double eig_hi) {
  Rng rng(seed);
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eigs(d);
  for (int i = 0; i < d; ++i)
    eigs(i) = eig_lo + (eig_hi - eig_lo) * rng.next_uniform();
  return q * eigs.asDiagonal() * q.transpose();
}

// a genuinely joint triple: correlations strictly below 1
CovarianceTriple random_triple(int dx, int dy, std::uint64_t seed) {
  CovarianceTriple cov;
  cov.sxx = random_spd(dx, seed, 0.4, 1.0);
  cov.syy = random_spd(dy, seed + 1, 0.4, 1.0);
  Rng rng(seed + 2);
  Eigen::MatrixXd t(dx, dy);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < dy; ++j) t(i, j) = rng.next_normal();
  t *= 0.5 / t.jacobiSvd().singularValues()(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(cov.sxx), ey(cov.syy);
  cov.sxy = ex.operatorSqrt() * t * ey.operatorSqrt();
  cov.n = 0;
  return cov;
}

}  // namespace

TEST_SUITE("whitening") {

TEST_CASE("spd square roots invert each other") {
  const Eigen::MatrixXd m = random_spd(5, 3, 0.2, 2.0);
  const Eigen::MatrixXd r = spd_sqrt(m);
  const Eigen::MatrixXd ri = spd_inv_sqrt(m);
  CHECK((r * r - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ri * m * ri - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r * ri - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse square root refuses a singular matrix") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;  // rank 2
  CHECK_THROWS_AS(spd_inv_sqrt(m), SingularCovariance);
}

TEST_CASE("identity whitening passes the cross block through") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(2, 2);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = Eigen::MatrixXd(2, 2);
  cov.sxy << 0.6, 0.0, 0.0, 0.1;
  const WhitenedOperator op = whitened_operator(cov);
  CHECK((op.t_hat - cov.sxy).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(op.singular_values(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(op.singular_values(1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("scalar auto blocks rescale the cross block") {
  CovarianceTriple cov;
  cov.sxx = 4.0 * Eigen::MatrixXd::Identity(2, 2);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = Eigen::MatrixXd(2, 2);
  cov.sxy << 0.5, 0.2, -0.1, 0.3;
  const WhitenedOperator op = whitened_operator(cov);
  CHECK((op.t_hat - cov.sxy / 2.0).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("singular values match an explicit dense oracle") {
  const CovarianceTriple cov = random_triple(4, 4, 21);
  const WhitenedOperator op = whitened_operator(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(cov.sxx), ey(cov.syy);
  const Eigen::MatrixXd t =
      ex.operatorInverseSqrt() * cov.sxy * ey.operatorInverseSqrt();
  const Eigen::VectorXd sv = t.jacobiSvd().singularValues();
  REQUIRE(op.singular_values.size() == sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    CHECK(op.singular_values(i) == doctest::Approx(sv(i)).epsilon(1e-10));
  }
  CHECK((op.t_hat - t).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("singular vectors are orthonormal and sign fixed") {
  const CovarianceTriple cov = random_triple(5, 3, 33);
  const WhitenedOperator op = whitened_operator(cov);
  const int k = static_cast<int>(op.singular_values.size());
  const Eigen::MatrixXd gu =
      op.left_vectors.transpose() * op.left_vectors;
  const Eigen::MatrixXd gv =
      op.right_vectors.transpose() * op.right_vectors;
  CHECK((gu - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((gv - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < k; ++i) {
    int arg = 0;
    op.left_vectors.col(i).cwiseAbs().maxCoeff(&arg);
    CHECK(op.left_vectors(arg, i) > 0.0);
  }
  // reconstruction through the stored factors
  const Eigen::MatrixXd rec = op.left_vectors *
                              op.singular_values.asDiagonal() *
                              op.right_vectors.transpose();
  CHECK((rec - op.t_hat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("correlations above one are rejected") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(2, 2);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = 1.5 * Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(whitened_operator(cov), InvalidModel);
}

TEST_CASE("ridge rescues a singular auto block") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Zero(2, 2);
  cov.sxx(0, 0) = 1.0;
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = Eigen::MatrixXd::Zero(2, 2);
  cov.sxy(0, 0) = 0.5;
  CHECK_THROWS_AS(whitened_operator(cov), SingularCovariance);
  CHECK_NOTHROW(whitened_operator(cov, 1e-3));
}

TEST_CASE("diagonal embedding has the mirrored spectrum") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(2, 2);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = Eigen::MatrixXd(2, 2);
  cov.sxy << 0.5, 0.0, 0.0, 0.2;
  const SymmetricEmbedding emb = symmetric_embedding(whitened_operator(cov));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(emb.c);
  const Eigen::VectorXd ev = es.eigenvalues();
  CHECK(ev(0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(ev(3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero cross block embeds to the zero matrix") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(3, 3);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = Eigen::MatrixXd::Zero(3, 2);
  const SymmetricEmbedding emb = symmetric_embedding(whitened_operator(cov));
  CHECK(emb.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(emb.d_x == 3);
  CHECK(emb.d_y == 2);
}

TEST_CASE("embedding structure: zero diagonal blocks, symmetric spectrum") {
  const CovarianceTriple cov = random_triple(4, 3, 41);
  const WhitenedOperator op = whitened_operator(cov);
  const SymmetricEmbedding emb = symmetric_embedding(op);
  CHECK(emb.c.topLeftCorner(4, 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(emb.c.bottomRightCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK((emb.c - emb.c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(emb.c);
  const Eigen::VectorXd ev = es.eigenvalues();
  const int d = 7;
  for (int k = 0; k < d; ++k) {
    CHECK(ev(k) == doctest::Approx(-ev(d - 1 - k)).epsilon(1e-10));
  }
  // top eigenvector splits into the leading singular pair over sqrt(2)
  const Eigen::VectorXd top = es.eigenvectors().col(d - 1);
  Eigen::VectorXd expect(d);
  expect << op.left_vectors.col(0) / std::sqrt(2.0),
      op.right_vectors.col(0) / std::sqrt(2.0);
  const double s = top.dot(expect) >= 0 ? 1.0 : -1.0;
  CHECK((s * top - expect).cwiseAbs().maxCoeff() < 1e-10);
}

}  // TEST_SUITE
