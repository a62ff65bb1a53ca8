#include <doctest.h>

#include <Eigen/Dense>

#include "sicca/covariance.hpp"
#include "sicca/errors.hpp"
#include "sicca/rng.hpp"

using namespace sicca;

namespace {

Dataset random_dataset(int n, int dx, int dy, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd xs(n, dx), ys(n, dy);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dx; ++j) xs(i, j) = rng.next_normal();
    for (int j = 0; j < dy; ++j) ys(i, j) = rng.next_normal();
  }
  return Dataset(xs, ys);
}

}  // namespace

TEST_SUITE("covariance") {

TEST_CASE("two swapped unit pairs") {
  Eigen::MatrixXd xs(2, 2), ys(2, 2);
  xs << 1, 0, 0, 1;
  ys << 0, 1, 1, 0;
  const CovarianceTriple c = empirical_covariances(Dataset(xs, ys));
  CHECK((c.sxx - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK((c.syy - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  Eigen::MatrixXd anti(2, 2);
  anti << 0, 0.5, 0.5, 0;
  CHECK((c.sxy - anti).norm() == 0.0);
  CHECK_FALSE(c.centered);
  CHECK(c.n == 2);
}

TEST_CASE("a single pair gives the outer product exactly") {
  Eigen::MatrixXd xs(1, 3), ys(1, 2);
  xs << 1.5, -2.0, 0.25;
  ys << 3.0, -1.0;
  const CovarianceTriple c = empirical_covariances(Dataset(xs, ys));
  const Eigen::MatrixXd expect = xs.row(0).transpose() * ys.row(0);
  CHECK((c.sxy - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uncentered blocks match a per-entry accumulation oracle") {
  const Dataset d = random_dataset(5, 3, 2, 11);
  const CovarianceTriple c = empirical_covariances(d);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 2; ++b) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) acc += d.xs()(i, a) * d.ys()(i, b);
      CHECK(c.sxy(a, b) == doctest::Approx(acc / 5.0).epsilon(1e-14));
    }
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double acc = 0.0;
      for (int i = 0; i < 5; ++i) acc += d.xs()(i, a) * d.xs()(i, b);
      CHECK(c.sxx(a, b) == doctest::Approx(acc / 5.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("auto blocks come out exactly symmetric") {
  const CovarianceTriple c = empirical_covariances(random_dataset(50, 4, 3, 5));
  CHECK((c.sxx - c.sxx.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.syy - c.syy.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scaling samples by c scales blocks by c squared") {
  const Dataset d = random_dataset(20, 3, 3, 7);
  const Dataset scaled(2.0 * d.xs(), 2.0 * d.ys());
  const CovarianceTriple a = empirical_covariances(d);
  const CovarianceTriple b = empirical_covariances(scaled);
  CHECK((b.sxy - 4.0 * a.sxy).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((b.sxx - 4.0 * a.sxx).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("centered covariances of identical pairs vanish") {
  Eigen::MatrixXd xs(2, 2), ys(2, 2);
  xs << 1, 2, 1, 2;
  ys << -1, 3, -1, 3;
  const CovarianceTriple c = centered_covariances(Dataset(xs, ys));
  CHECK(c.sxx.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.sxy.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.syy.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.centered);
}

TEST_CASE("centered covariances ignore constant shifts") {
  const Dataset d = random_dataset(6, 2, 2, 13);
  Eigen::MatrixXd shifted = d.xs();
  shifted.array() += 5.0;
  const CovarianceTriple a = centered_covariances(d);
  const CovarianceTriple b = centered_covariances(Dataset(shifted, d.ys()));
  CHECK((a.sxx - b.sxx).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((a.sxy - b.sxy).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("centered blocks match the direct deviation formula") {
  const Dataset d = random_dataset(6, 3, 2, 17);
  const CovarianceTriple c = centered_covariances(d);
  const Eigen::RowVectorXd mx = d.xs().colwise().mean();
  const Eigen::RowVectorXd my = d.ys().colwise().mean();
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 2);
  for (int i = 0; i < 6; ++i) {
    expect += (d.xs().row(i) - mx).transpose() * (d.ys().row(i) - my);
  }
  expect /= 5.0;
  CHECK((c.sxy - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("centering needs two samples") {
  CHECK_THROWS_AS(centered_covariances(random_dataset(1, 2, 2, 1)),
                  InsufficientSamples);
}

TEST_CASE("concentration of an exact estimate is zero") {
  const CovarianceTriple pop = empirical_covariances(random_dataset(80, 3, 3, 3));
  const ConcentrationReport r = concentration_error(pop, pop);
  CHECK(r.nu_xx < 1e-12);
  CHECK(r.nu_yy < 1e-12);
  CHECK(r.nu_xy < 1e-12);
  CHECK(r.nu < 1e-12);
}

TEST_CASE("doubling the x block gives deviation one") {
  const CovarianceTriple pop = empirical_covariances(random_dataset(80, 3, 3, 9));
  CovarianceTriple est = pop;
  est.sxx *= 2.0;
  const ConcentrationReport r = concentration_error(pop, est);
  CHECK(r.nu_xx == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.nu_yy < 1e-12);
  CHECK(r.nu == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("concentration matches an explicit whitened-matrix oracle") {
  const CovarianceTriple pop = empirical_covariances(random_dataset(120, 3, 2, 19));
  const CovarianceTriple est = empirical_covariances(random_dataset(60, 3, 2, 23));
  const ConcentrationReport r = concentration_error(pop, est);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(pop.sxx), ey(pop.syy);
  const Eigen::MatrixXd wx = ex.operatorInverseSqrt();
  const Eigen::MatrixXd wy = ey.operatorInverseSqrt();
  const Eigen::MatrixXd mxx =
      wx * est.sxx * wx - Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd mxy = wx * (est.sxy - pop.sxy) * wy;
  CHECK(r.nu_xx == doctest::Approx(mxx.jacobiSvd().singularValues()(0)).epsilon(1e-12));
  CHECK(r.nu_xy == doctest::Approx(mxy.jacobiSvd().singularValues()(0)).epsilon(1e-12));
  CHECK(r.nu == doctest::Approx(std::max({r.nu_xx, r.nu_yy, r.nu_xy})).epsilon(1e-15));
}

TEST_CASE("mismatched triples are rejected") {
  const CovarianceTriple pop = empirical_covariances(random_dataset(40, 3, 2, 29));
  const CovarianceTriple est = empirical_covariances(random_dataset(40, 2, 2, 31));
  CHECK_THROWS_AS(concentration_error(pop, est), DimensionError);
}

}  // TEST_SUITE
