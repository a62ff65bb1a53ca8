#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>

#include "sicca/covariance.hpp"
#include "sicca/dataset.hpp"
#include "sicca/errors.hpp"
#include "sicca/models.hpp"
#include "sicca/rng.hpp"
#include "sicca/stream.hpp"
#include "sicca/streaming.hpp"

using namespace sicca;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("sicca_stream_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

Model pair_model(int d, double delta) {
  Eigen::VectorXd phi = Eigen::VectorXd::Unit(d, 0);
  return SingleCanonicalPairModel(phi, phi, delta);
}

}  // namespace

TEST_SUITE("stream") {

TEST_CASE("model stream counts every delivered pair") {
  ModelStream stream(pair_model(3, 0.5), 7);
  CHECK(stream.d_x() == 3);
  CHECK(stream.d_y() == 3);
  CHECK(stream.samples_consumed() == 0);
  Eigen::VectorXd x(3), y(3);
  for (int i = 0; i < 25; ++i) stream.next(x, y);
  CHECK(stream.samples_consumed() == 25);
}

TEST_CASE("model stream draws match batch sampling for the same seed") {
  const Model model = pair_model(4, 0.3);
  ModelStream stream(model, 99);
  const Dataset batch = sample_dataset(model, 10, 99);
  Eigen::VectorXd x(4), y(4);
  for (int i = 0; i < 10; ++i) {
    stream.next(x, y);
    CHECK(x == batch.xs().row(i).transpose());
    CHECK(y == batch.ys().row(i).transpose());
  }
}

TEST_CASE("csv stream replays a file once and then stops") {
  TempDir tmp;
  const std::string path = (tmp.path / "pairs.csv").string();
  Eigen::MatrixXd xs(3, 2), ys(3, 1);
  xs << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  ys << -1.0, -2.0, -3.0;
  write_csv(Dataset(xs, ys), path);

  CsvStream stream(path);
  CHECK(stream.d_x() == 2);
  CHECK(stream.d_y() == 1);
  Eigen::VectorXd x(2), y(1);
  for (int i = 0; i < 3; ++i) {
    stream.next(x, y);
    CHECK(x == xs.row(i).transpose());
    CHECK(y == ys.row(i).transpose());
  }
  CHECK(stream.samples_consumed() == 3);
  CHECK_THROWS_AS(stream.next(x, y), StreamExhausted);
}

TEST_CASE("csv stream rejects malformed rows") {
  TempDir tmp;
  const std::string path = (tmp.path / "bad.csv").string();
  {
    std::ofstream out(path);
    out << "x0,y0\n1.0,2.0\nnot-a-number,3.0\n";
  }
  CsvStream stream(path);
  Eigen::VectorXd x(1), y(1);
  stream.next(x, y);
  CHECK_THROWS_AS(stream.next(x, y), IoError);
  CHECK_THROWS_AS(CsvStream("/nonexistent/file.csv"), IoError);
}

TEST_CASE("stream factories mirror the direct constructors") {
  TempDir tmp;
  const std::string model_path = (tmp.path / "m.model").string();
  {
    ModelSpec spec;
    spec.model_class = "single-pair";
    spec.d_x = 3;
    spec.d_y = 3;
    spec.delta = 0.4;
    write_model_spec(spec, model_path);
  }
  auto ms = open_model_stream(model_path, 5);
  REQUIRE(ms != nullptr);
  CHECK(ms->d_x() == 3);
  Eigen::VectorXd x(3), y(3);
  ms->next(x, y);
  CHECK(ms->samples_consumed() == 1);

  const std::string csv_path = (tmp.path / "d.csv").string();
  Eigen::MatrixXd xs(2, 3), ys(2, 3);
  xs.setRandom();
  ys.setRandom();
  write_csv(Dataset(xs, ys), csv_path);
  auto cs = open_csv_stream(csv_path);
  REQUIRE(cs != nullptr);
  CHECK(cs->d_y() == 3);
}

TEST_CASE("pilot draws advance the counter and freeze the samples") {
  ModelStream stream(pair_model(3, 0.5), 11);
  const Pilot pilot = draw_pilot(stream, 120);
  CHECK(pilot.n() == 120);
  CHECK(stream.samples_consumed() == 120);
  CHECK_THROWS_AS(draw_pilot(stream, 0), ConfigError);

  // quadratic form against the explicit pilot second-moment blocks
  Eigen::VectorXd w(6);
  Rng rng(3);
  for (int i = 0; i < 6; ++i) w(i) = rng.next_normal();
  const Eigen::MatrixXd bxx = pilot.xs.transpose() * pilot.xs / 120.0;
  const Eigen::MatrixXd byy = pilot.ys.transpose() * pilot.ys / 120.0;
  const double expected =
      w.head(3).dot(bxx * w.head(3)) + w.tail(3).dot(byy * w.tail(3));
  CHECK(pilot_b_quadratic(pilot, w) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("moment-based conditioning on an identity instance") {
  // gamma = 1, rho1 known, shift a quarter above: beta1 = 4 and mu = 1/4
  const ConditioningEstimates c =
      conditioning_from_moments(1.0, 0.5, 2.0, 0.75, TailClass::SubGaussian);
  CHECK(c.beta1 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.mu == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.S == doctest::Approx(2.0 * 4.0 / 1.0).epsilon(1e-12));
  CHECK(c.sigma_sq_unit == doctest::Approx(2.0 * 64.0).epsilon(1e-12));
  CHECK(c.m2 == 2.0);
}

TEST_CASE("bounded-class conditioning drops the dimension factor") {
  const ConditioningEstimates c =
      conditioning_from_moments(0.5, 0.4, 1.5, 0.65, TailClass::Bounded);
  const double beta1 = 1.0 / 0.25;
  CHECK(c.beta1 == doctest::Approx(beta1).epsilon(1e-12));
  CHECK(c.S == doctest::Approx(beta1 / 0.5).epsilon(1e-12));
  CHECK(c.sigma_sq_unit ==
        doctest::Approx(beta1 * beta1 * beta1 / 0.25).epsilon(1e-12));
}

TEST_CASE("pilot conditioning tracks the generator within a small factor") {
  const int d = 4;
  ModelStream stream(pair_model(d, 0.5), 21);
  const Pilot pilot = draw_pilot(stream, 8000);
  ConditioningOptions opt;
  const double lambda = 0.75;
  const ConditioningEstimates c = estimate_conditioning(pilot, lambda, opt);

  CHECK(c.rho1_est == doctest::Approx(0.5).epsilon(0.05));
  CHECK(c.gamma_est == doctest::Approx(1.0).epsilon(0.1));
  CHECK(c.m2 == doctest::Approx(2.0 * d).epsilon(0.05));

  // S within a factor 4 of the explicit dimension-scaled form
  const double beta1 = 1.0 / (lambda - 0.5);
  const double s_formula = 2.0 * d * beta1 / 1.0;
  CHECK(c.S >= s_formula / 4.0);
  CHECK(c.S <= s_formula * 4.0);
}

TEST_CASE("a correlation hint overrides the pilot estimate") {
  ModelStream stream(pair_model(3, 0.5), 31);
  const Pilot pilot = draw_pilot(stream, 500);
  ConditioningOptions opt;
  opt.rho1_hint = 0.5;
  const ConditioningEstimates c = estimate_conditioning(pilot, 0.8, opt);
  CHECK(c.rho1_est == 0.5);
  CHECK(c.beta1 == doctest::Approx(1.0 / 0.3).epsilon(1e-12));
}

TEST_CASE("tiny pilots are rejected") {
  ModelStream stream(pair_model(3, 0.5), 41);
  const Pilot pilot = draw_pilot(stream, 99);
  CHECK_THROWS_AS(estimate_conditioning(pilot, 0.8, ConditioningOptions{}),
                  InsufficientSamples);
}

}  // TEST_SUITE
