#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "sicca/covariance.hpp"
#include "sicca/erm.hpp"
#include "sicca/errors.hpp"
#include "sicca/models.hpp"
#include "sicca/whitening.hpp"

using namespace sicca;

namespace {

SingleCanonicalPairModel e1_model(int dx, int dy, double delta) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(dx);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(dy);
  phi(0) = 1.0;
  psi(0) = 1.0;
  return SingleCanonicalPairModel(phi, psi, delta);
}

Eigen::MatrixXd joint_covariance(const CovarianceTriple& cov) {
  const int dx = cov.d_x(), dy = cov.d_y();
  Eigen::MatrixXd j(dx + dy, dx + dy);
  j.topLeftCorner(dx, dx) = cov.sxx;
  j.topRightCorner(dx, dy) = cov.sxy;
  j.bottomLeftCorner(dy, dx) = cov.sxy.transpose();
  j.bottomRightCorner(dy, dy) = cov.syy;
  return j;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("single pair population optimum is the planted pair") {
  const int d = 4;
  Eigen::VectorXd phi = Eigen::VectorXd::Unit(d, 0);
  Eigen::VectorXd psi = Eigen::VectorXd::Unit(d, 1);
  const SingleCanonicalPairModel m(phi, psi, 0.5);
  const PopulationSolution ps = population_solution(m);
  CHECK((ps.solution.u - phi).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((ps.solution.v - psi).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ps.solution.correlation_estimate.value() == doctest::Approx(0.5));
  CHECK(ps.conditioning.rho1 == doctest::Approx(0.5));
  CHECK(ps.conditioning.gap == doctest::Approx(0.5));
  CHECK(ps.conditioning.gamma == doctest::Approx(1.0));
  CHECK(ps.solution.normalization == Normalization::PopulationUnit);
}

TEST_CASE("invalid pair models are rejected") {
  const int d = 3;
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(d, 0);
  CHECK_THROWS_AS(SingleCanonicalPairModel(e1, e1, 1.0), InvalidModel);
  CHECK_THROWS_AS(SingleCanonicalPairModel(e1, e1, -0.1), InvalidModel);
  CHECK_THROWS_AS(SingleCanonicalPairModel(2.0 * e1, e1, 0.5), InvalidModel);
}

TEST_CASE("joint covariance spectrum is one plus-minus delta") {
  const double delta = 0.7;
  const SingleCanonicalPairModel m = e1_model(3, 3, delta);
  const Eigen::MatrixXd j = joint_covariance(population_covariances(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  const Eigen::VectorXd ev = es.eigenvalues();
  CHECK(ev(0) == doctest::Approx(1.0 - delta).epsilon(1e-12));
  CHECK(ev(5) == doctest::Approx(1.0 + delta).epsilon(1e-12));
  for (int i = 1; i < 5; ++i) CHECK(ev(i) == doctest::Approx(1.0).epsilon(1e-12));

  // cholesky succeeds strictly below delta = 1 and fails at 1
  CHECK(Eigen::LLT<Eigen::MatrixXd>(j).info() == Eigen::Success);
  Eigen::MatrixXd degenerate = j;
  degenerate.topRightCorner(3, 3) *= 1.0 / delta;   // delta -> 1
  degenerate.bottomLeftCorner(3, 3) *= 1.0 / delta;
  CHECK(Eigen::LLT<Eigen::MatrixXd>(degenerate).info() != Eigen::Success);
}

TEST_CASE("independent blocks at delta zero") {
  const SingleCanonicalPairModel m = e1_model(3, 3, 0.0);
  const Dataset d = sample_single_canonical_pair(m, 100000, 21);
  const CovarianceTriple c = empirical_covariances(d);
  CHECK(std::abs(c.sxy(0, 0)) < 0.02);
  CHECK(c.sxy.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("sampled cross covariance concentrates on the planted block") {
  const SingleCanonicalPairModel m = e1_model(4, 4, 0.5);
  const Dataset d = sample_single_canonical_pair(m, 100000, 8);
  const CovarianceTriple c = empirical_covariances(d);
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(4, 4);
  target(0, 0) = 0.5;
  CHECK((c.sxy - target).jacobiSvd().singularValues()(0) < 0.03);
  CHECK((c.sxx - Eigen::MatrixXd::Identity(4, 4)).jacobiSvd().singularValues()(0) < 0.05);
  CHECK((c.syy - Eigen::MatrixXd::Identity(4, 4)).jacobiSvd().singularValues()(0) < 0.05);
}

TEST_CASE("fixed seed reproduces draws bit for bit") {
  const SingleCanonicalPairModel m = e1_model(3, 2, 0.4);
  const Dataset a = sample_single_canonical_pair(m, 3, 42);
  const Dataset b = sample_single_canonical_pair(m, 3, 42);
  CHECK((a.xs() - b.xs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.ys() - b.ys()).cwiseAbs().maxCoeff() == 0.0);
  const Dataset c = sample_single_canonical_pair(m, 3, 43);
  CHECK((a.xs() - c.xs()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("population covariances agree with measured second moments") {
  // exercises the O(d) draw path against the exact model law
  Eigen::VectorXd phi(3), psi(3);
  phi << 0.6, -0.8, 0.0;
  psi << 0.0, 0.6, 0.8;
  const SingleCanonicalPairModel m(phi, psi, 0.6);
  const CovarianceTriple pop = population_covariances(m);
  CHECK((pop.sxy - 0.6 * phi * psi.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  const Dataset d = sample_single_canonical_pair(m, 200000, 5);
  const CovarianceTriple c = empirical_covariances(d);
  CHECK((c.sxx - pop.sxx).jacobiSvd().singularValues()(0) < 0.03);
  CHECK((c.syy - pop.syy).jacobiSvd().singularValues()(0) < 0.03);
  CHECK((c.sxy - pop.sxy).jacobiSvd().singularValues()(0) < 0.03);
}

TEST_CASE("general model draws realize the requested covariance") {
  const ModelSpec spec{"general", 8, 8, 0.5, 7, "e1"};
  const Model m = build_model(spec);
  const auto& g = std::get<GeneralGaussianModel>(m);
  const PopulationSolution ps = population_solution(g);
  CHECK(ps.conditioning.rho1 == doctest::Approx(0.5).epsilon(1e-10));
  const Dataset d = sample_general_gaussian(g, 20000, 3);
  const WhitenedOperator emp = whitened_operator(empirical_covariances(d));
  const Eigen::VectorXd pop_sv = g.whitened().singular_values;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(emp.singular_values(i) - pop_sv(i)) < 0.05);
  }
}

TEST_CASE("identity general model has standard normal marginals") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(3, 3);
  cov.syy = Eigen::MatrixXd::Identity(3, 3);
  cov.sxy = Eigen::MatrixXd::Zero(3, 3);
  const GeneralGaussianModel g(cov);
  const Dataset d = sample_general_gaussian(g, 10000, 11);
  CHECK(d.xs().colwise().mean().cwiseAbs().maxCoeff() < 0.03);
  CHECK(d.ys().colwise().mean().cwiseAbs().maxCoeff() < 0.03);
  const Dataset d2 = sample_general_gaussian(g, 10000, 11);
  CHECK((d.xs() - d2.xs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("general models reject impossible covariances") {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(2, 2);
  cov.syy = Eigen::MatrixXd::Identity(2, 2);
  cov.sxy = 1.2 * Eigen::MatrixXd::Identity(2, 2);  // correlation above one
  CHECK_THROWS_AS((GeneralGaussianModel{cov}), InvalidModel);
}

TEST_CASE("student-t tail keeps the second moment") {
  const ModelSpec spec{"polynomial-tail", 4, 4, 0.5, 13, "e1"};
  const Model m = build_model(spec);
  const auto& g = std::get<GeneralGaussianModel>(m);
  CHECK(g.tail() == TailKind::StudentT);
  const Dataset d = sample_general_gaussian(g, 200000, 17);
  const CovarianceTriple c = empirical_covariances(d);
  const CovarianceTriple pop = g.population();
  // heavier tails, so looser monte-carlo tolerance than the gaussian case
  CHECK((c.sxx - pop.sxx).jacobiSvd().singularValues()(0) < 0.1);
  CHECK((c.sxy - pop.sxy).jacobiSvd().singularValues()(0) < 0.1);
}

TEST_CASE("bounded draws never leave the unit balls") {
  const ModelSpec spec{"bounded", 5, 5, 0.5, 19, "e1"};
  const Model m = build_model(spec);
  const auto& b = std::get<BoundedModel>(m);
  const Dataset d = sample_bounded(b, 10000, 23);
  for (std::int64_t i = 0; i < d.size(); ++i) {
    CHECK(d.xs().row(i).norm() <= 1.0 + 1e-12);
    CHECK(d.ys().row(i).norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("truncation preserves the correlation structure") {
  const ModelSpec spec{"bounded", 4, 4, 0.6, 29, "e1"};
  const Model m = build_model(spec);
  const auto& b = std::get<BoundedModel>(m);
  const Dataset d = sample_bounded(b, 10000, 31);
  const double rho_data = erm_canonical_correlation(empirical_covariances(d));
  // independent oracle on the very same truncated samples
  const CovarianceTriple c = empirical_covariances(d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(c.sxx), ey(c.syy);
  const Eigen::MatrixXd t =
      ex.operatorInverseSqrt() * c.sxy * ey.operatorInverseSqrt();
  const double rho_oracle = t.jacobiSvd().singularValues()(0);
  CHECK(rho_data == doctest::Approx(rho_oracle).epsilon(1e-10));
  // and the prescaled-base population value survives truncation approximately
  const PopulationSolution ps = population_solution(b);
  CHECK(std::abs(rho_data - ps.conditioning.rho1) < 0.15);
}

TEST_CASE("empirical concentration improves with sample size") {
  const ModelSpec spec{"general", 5, 5, 0.5, 37, "e1"};
  const Model m = build_model(spec);
  const auto& g = std::get<GeneralGaussianModel>(m);
  const CovarianceTriple pop = g.population();
  std::vector<double> nu_small, nu_large;
  for (std::uint64_t s = 0; s < 20; ++s) {
    nu_small.push_back(
        concentration_error(pop, empirical_covariances(
                                     sample_general_gaussian(g, 500, 100 + s)))
            .nu);
    nu_large.push_back(
        concentration_error(pop, empirical_covariances(
                                     sample_general_gaussian(g, 4000, 200 + s)))
            .nu);
  }
  std::nth_element(nu_small.begin(), nu_small.begin() + 10, nu_small.end());
  std::nth_element(nu_large.begin(), nu_large.begin() + 10, nu_large.end());
  CHECK(nu_large[10] < nu_small[10]);
}

TEST_CASE("model spec files round trip") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("sicca_models_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.model").string();
  ModelSpec spec;
  spec.model_class = "single-pair";
  spec.d_x = 6;
  spec.d_y = 4;
  spec.delta = 0.35;
  spec.structure_seed = 99;
  spec.direction = "random";
  write_model_spec(spec, path);
  const ModelSpec r = parse_model_spec(path);
  CHECK(r.model_class == spec.model_class);
  CHECK(r.d_x == 6);
  CHECK(r.d_y == 4);
  CHECK(r.delta == 0.35);
  CHECK(r.structure_seed == 99);
  CHECK(r.direction == "random");

  const Model m = build_model(r);
  CHECK(model_d_x(m) == 6);
  CHECK(model_d_y(m) == 4);
  const auto& sp = std::get<SingleCanonicalPairModel>(m);
  CHECK(sp.phi().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.psi().norm() == doctest::Approx(1.0).epsilon(1e-12));
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown classes and directions are config errors") {
  ModelSpec spec;
  spec.model_class = "mystery";
  spec.d_x = spec.d_y = 2;
  spec.delta = 0.5;
  CHECK_THROWS_AS(build_model(spec), ConfigError);
  spec.model_class = "single-pair";
  spec.direction = "sideways";
  CHECK_THROWS_AS(build_model(spec), ConfigError);
}

}  // TEST_SUITE
