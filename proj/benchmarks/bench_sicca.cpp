#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "sicca/covariance.hpp"
#include "sicca/dataset.hpp"
#include "sicca/erm.hpp"
#include "sicca/models.hpp"
#include "sicca/rng.hpp"
#include "sicca/shifted_system.hpp"
#include "sicca/stream.hpp"
#include "sicca/streaming.hpp"
#include "sicca/svrg.hpp"

namespace {

sicca::Model pair_model(int d) {
  Eigen::VectorXd phi = Eigen::VectorXd::Unit(d, 0);
  return sicca::SingleCanonicalPairModel(phi, phi, 0.5);
}

void BM_NormalDraw(benchmark::State& state) {
  sicca::Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.next_normal();
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalDraw);

void BM_ModelDraw(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const sicca::Model model = pair_model(d);
  sicca::Rng rng(2);
  Eigen::VectorXd x(d), y(d);
  for (auto _ : state) {
    sicca::model_draw(model, rng, x, y);
    benchmark::DoNotOptimize(x.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ModelDraw)->Arg(8)->Arg(64)->Arg(512);

void BM_StreamNext(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  sicca::ModelStream stream(pair_model(d), 3);
  Eigen::VectorXd x(d), y(d);
  for (auto _ : state) {
    stream.next(x, y);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StreamNext)->Arg(8)->Arg(64)->Arg(512);

void BM_EmpiricalCovariances(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const sicca::Dataset data = sicca::sample_dataset(pair_model(d), 2000, 4);
  for (auto _ : state) {
    const sicca::CovarianceTriple cov = sicca::empirical_covariances(data);
    benchmark::DoNotOptimize(cov.sxy.data());
  }
}
BENCHMARK(BM_EmpiricalCovariances)->Arg(8)->Arg(32);

void BM_ErmSolve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const sicca::Dataset data = sicca::sample_dataset(pair_model(d), 2000, 5);
  const sicca::CovarianceTriple cov = sicca::empirical_covariances(data);
  for (auto _ : state) {
    const sicca::CcaSolution sol = sicca::solve_erm_exact(cov);
    benchmark::DoNotOptimize(sol.u.data());
  }
}
BENCHMARK(BM_ErmSolve)->Arg(8)->Arg(32);

void BM_SvrgInnerSolve(benchmark::State& state) {
  const sicca::Dataset data = sicca::sample_dataset(pair_model(5), 1000, 6);
  const sicca::CovarianceTriple cov = sicca::empirical_covariances(data);
  const double rho1 = sicca::erm_canonical_correlation(cov);
  const sicca::ShiftedSystem sys =
      sicca::make_shifted_system(data, cov, rho1 + 0.15, rho1);
  sicca::Rng setup(7);
  Eigen::VectorXd w_t(10);
  for (int i = 0; i < 10; ++i) w_t(i) = setup.next_normal();
  w_t /= std::sqrt(w_t.dot(sicca::apply_B(cov, w_t)));
  const Eigen::VectorXd init = sicca::warm_start_scale(sys, w_t) * w_t;
  for (auto _ : state) {
    sicca::Rng rng(8);
    const sicca::SvrgResult res = sicca::svrg_solve(
        sys, w_t, init, sicca::SolveTolerance{64.0, -1.0}, sicca::SvrgOptions{},
        rng);
    benchmark::DoNotOptimize(res.w.data());
  }
}
BENCHMARK(BM_SvrgInnerSolve);

// the O(d) kernel of the streaming path: one variance-reduced gradient
void BM_StreamingGradient(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  sicca::ModelStream stream(pair_model(d), 9);
  sicca::SamplePair pair;
  pair.x.resize(d);
  pair.y.resize(d);
  stream.next(pair.x, pair.y);
  sicca::StreamingLsProblem prob;
  prob.lambda = 0.75;
  prob.w_t = Eigen::VectorXd::Constant(2 * d, 1.0 / std::sqrt(2.0 * d));
  prob.beta1_r_sq = 1.0;
  Eigen::VectorXd w = prob.w_t;
  for (auto _ : state) {
    const Eigen::VectorXd g = sicca::stochastic_gradient(prob, w, pair);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StreamingGradient)->Arg(64)->Arg(512)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
