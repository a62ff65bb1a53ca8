#include <Eigen/Eigenvalues>
#include <cmath>
#include <algorithm>

#include "sicca/erm.hpp"
#include "sicca/errors.hpp"
#include "sicca/streaming.hpp"

namespace sicca {

namespace {

constexpr std::uint64_t kTagInit = 0x77696e6974ULL;
constexpr std::uint64_t kTagSystem = 0x73797374ULL;

// Smallest eigenvalue of the uncentered second moment of one pilot block,
// or zero when the block cannot be full rank. The skip keeps the estimator
// free of d x d work for short pilots at large d.
double block_min_eigenvalue(const Eigen::MatrixXd& block) {
  const std::int64_t n = block.rows();
  const std::int64_t d = block.cols();
  if (n < d) return 0.0;
  Eigen::MatrixXd second = (block.transpose() * block) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CovarianceTriple pilot_covariances(const Pilot& pilot) {
  const double n = static_cast<double>(pilot.n());
  CovarianceTriple cov;
  cov.sxx = (pilot.xs.transpose() * pilot.xs) / n;
  cov.sxy = (pilot.xs.transpose() * pilot.ys) / n;
  cov.syy = (pilot.ys.transpose() * pilot.ys) / n;
  cov.n = pilot.n();
  return cov;
}

}  // namespace

ConditioningEstimates conditioning_from_moments(double gamma, double rho1,
                                                double m2, double lambda,
                                                TailClass tail) {
  if (!(gamma > 0.0)) {
    throw SingularCovariance("conditioning needs a positive spectral floor");
  }
  if (!(lambda > rho1)) {
    throw InvalidShift("conditioning: shift must exceed the top correlation");
  }
  ConditioningEstimates est;
  est.gamma_est = gamma;
  est.rho1_est = rho1;
  est.m2 = m2;
  est.beta1 = 1.0 / (lambda - rho1);
  est.mu = gamma / est.beta1;
  if (tail == TailClass::SubGaussian) {
    est.S = m2 * est.beta1 / gamma;
    est.sigma_sq_unit = m2 * est.beta1 * est.beta1 * est.beta1;
  } else {
    est.S = est.beta1 / gamma;
    est.sigma_sq_unit = est.beta1 * est.beta1 * est.beta1 / (gamma * gamma);
  }
  return est;
}

Pilot draw_pilot(SampleStream& stream, std::int64_t count) {
  if (count < 1) throw ConfigError("pilot draw needs a positive count");
  Pilot pilot;
  pilot.xs.resize(count, stream.d_x());
  pilot.ys.resize(count, stream.d_y());
  Eigen::VectorXd x(stream.d_x()), y(stream.d_y());
  for (std::int64_t i = 0; i < count; ++i) {
    stream.next(x, y);
    pilot.xs.row(i) = x.transpose();
    pilot.ys.row(i) = y.transpose();
  }
  return pilot;
}

double pilot_b_quadratic(const Pilot& pilot, const Eigen::VectorXd& w) {
  const int dx = static_cast<int>(pilot.xs.cols());
  const int dy = static_cast<int>(pilot.ys.cols());
  if (w.size() != dx + dy) {
    throw DimensionError("pilot quadratic form: vector size mismatch");
  }
  const double qx = (pilot.xs * w.head(dx)).squaredNorm();
  const double qy = (pilot.ys * w.tail(dy)).squaredNorm();
  return (qx + qy) / static_cast<double>(pilot.n());
}

ConditioningEstimates estimate_conditioning(const Pilot& pilot, double lambda,
                                            const ConditioningOptions& opt) {
  if (pilot.n() < 100) {
    throw InsufficientSamples("conditioning pilot needs at least 100 samples");
  }
  const double n = static_cast<double>(pilot.n());
  const double m2 =
      (pilot.xs.squaredNorm() + pilot.ys.squaredNorm()) / n;

  const double gamma_raw = std::min(block_min_eigenvalue(pilot.xs),
                                    block_min_eigenvalue(pilot.ys));
  const double gamma = std::max(gamma_raw, opt.gamma_lb);

  double rho1;
  if (opt.rho1_hint) {
    rho1 = *opt.rho1_hint;
  } else {
    rho1 = erm_canonical_correlation(pilot_covariances(pilot));
  }
  if (!(lambda > rho1)) {
    throw InvalidShift("conditioning: shift must exceed the top correlation");
  }
  return conditioning_from_moments(gamma, rho1, m2, lambda, opt.tail);
}

StreamingReport streaming_si_cca(SampleStream& stream,
                                 const StreamingParams& params,
                                 std::uint64_t seed) {
  const int dx = stream.d_x();
  const int dy = stream.d_y();
  const int dim = dx + dy;
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0)) {
    throw ConfigError("streaming solver: epsilon must lie in (0, 1)");
  }
  if (params.max_outer < 1) {
    throw ConfigError("streaming solver: max_outer must be positive");
  }

  const std::uint64_t counter_start = stream.samples_consumed();
  std::int64_t pilot_count = params.pilot_count;
  if (pilot_count <= 0) {
    pilot_count = std::clamp<std::int64_t>(2000 * dim, 100, 20000);
  }
  const Pilot pilot = draw_pilot(stream, pilot_count);

  ConditioningOptions copt;
  copt.gamma_lb = params.gamma_lb;
  copt.tail = params.tail;
  copt.rho1_hint = params.rho1_hint;
  const ConditioningEstimates est =
      estimate_conditioning(pilot, params.lambda, copt);

  // Start direction: pilot solution when the pilot plausibly resolves the
  // top pair, otherwise random. Either way the iterate carries unit pilot
  // quadratic norm so the residual scale starts at order one.
  Eigen::VectorXd w(dim);
  bool warm = pilot_count >= 4 * dim;
  if (warm) {
    try {
      const CcaSolution pilot_sol = solve_erm_exact(pilot_covariances(pilot));
      w.head(dx) = pilot_sol.u;
      w.tail(dy) = pilot_sol.v;
    } catch (const Error&) {
      warm = false;
    }
  }
  if (!warm) {
    Rng ir(Rng::derive(seed, kTagInit));
    for (int i = 0; i < dim; ++i) w[i] = ir.next_normal();
  }
  const double q0 = pilot_b_quadratic(pilot, w);
  if (!(q0 > 0.0)) {
    throw DegenerateDirection("streaming solver: start direction collapsed");
  }
  w /= std::sqrt(q0);

  const double spread = (params.lambda + est.rho1_est) /
                        (params.lambda - est.rho1_est);
  double angle_bound = std::sqrt(static_cast<double>(dim));
  if (warm) {
    const double pilot_angle = 2.0 * std::sqrt(est.m2 / static_cast<double>(pilot_count)) /
                               (params.lambda - est.rho1_est);
    angle_bound = std::min(angle_bound, pilot_angle);
  }
  const double g0 = std::max(0.5, std::sqrt(spread) * angle_bound);

  const double t_real = std::ceil(
      std::log(g0 * std::sqrt(8.0 / params.epsilon)) / std::log(7.0 / 5.0));
  int t_total = t_real > 1.0 ? static_cast<int>(t_real) : 1;
  if (t_total > params.max_outer) t_total = params.max_outer;

  StreamingReport report;
  report.pilot_samples = static_cast<std::uint64_t>(pilot_count);
  report.g0_est = g0;
  report.rho1_est = est.rho1_est;

  for (int t = 0; t < t_total; ++t) {
    const double g_model = g0 * std::pow(5.0 / 7.0, t);
    const double eta_t = g_model > 1.0 ? 1.0 / (64.0 * (1.0 + g0 * g0))
                                       : g_model * g_model / 64.0;
    const double r_sq = pilot_b_quadratic(pilot, w);
    if (!(r_sq > 0.0)) {
      throw DegenerateDirection("streaming solver: iterate collapsed");
    }

    StreamingConfig cfg;
    cfg.mu = est.mu;
    cfg.S = params.safety * est.S;
    cfg.sigma_sq = params.safety * est.sigma_sq_unit * r_sq;
    cfg.gamma_lb = params.gamma_lb;
    cfg.Gamma = params.gamma_epochs;

    StreamingLsProblem prob;
    prob.lambda = params.lambda;
    prob.w_t = w;
    prob.beta1_r_sq = est.beta1 * r_sq;

    const std::uint64_t sys_seed =
        Rng::derive(seed, kTagSystem + static_cast<std::uint64_t>(t));
    StreamingSvrgResult res = streaming_svrg(prob, stream, cfg, eta_t, sys_seed);
    w = std::move(res.w);

    StreamingSystemLedger ledger;
    ledger.eta_t = eta_t;
    ledger.samples = res.samples_used;
    ledger.epochs = std::move(res.epochs);
    report.epoch_samples += res.samples_used;
    report.systems.push_back(std::move(ledger));
  }

  report.outer_iters = t_total;
  report.samples_used = stream.samples_consumed() - counter_start;
  report.solution.u = w.head(dx);
  report.solution.v = w.tail(dy);
  report.solution.normalization = Normalization::Unnormalized;
  return report;
}

}  // namespace sicca
