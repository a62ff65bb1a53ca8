#include "sicca/offline.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "sicca/errors.hpp"
#include "sicca/whitening.hpp"

namespace sicca {

namespace {

constexpr std::uint64_t kTagLocate = 0x6c6f63617465ULL;
constexpr std::uint64_t kTagInit = 0x696e6974ULL;
constexpr std::uint64_t kTagInner = 0x696e6e6572ULL;

struct RhoGuess {
  double rho1 = 0.0;
  double rho2 = 0.0;
};

// Top-two correlation estimates through simultaneous power iterations on the
// gram of the whitened cross operator. Cheap relative to a full SVD route and
// accurate enough to seed the shift locator, which re-measures the top value
// through the inverse operator anyway.
RhoGuess power_rho_guess(const CovarianceTriple& cov, Rng& rng) {
  const Eigen::MatrixXd wx = spd_inv_sqrt(cov.sxx);
  const Eigen::MatrixXd wy = spd_inv_sqrt(cov.syy);
  const int dy = cov.d_y();
  const auto apply_gram = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const Eigen::VectorXd lifted = wx * (cov.sxy * (wy * v));
    return wy * (cov.sxy.transpose() * (wx * lifted));
  };

  Eigen::VectorXd v1(dy), v2(dy);
  for (int i = 0; i < dy; ++i) v1[i] = rng.next_normal();
  for (int i = 0; i < dy; ++i) v2[i] = rng.next_normal();
  if (v1.norm() < 1e-12) v1.setOnes();
  v1.normalize();

  double r1 = 0.0;
  double r2 = 0.0;
  for (int step = 0; step < 200; ++step) {
    Eigen::VectorXd n1 = apply_gram(v1);
    const double nr1 = v1.dot(n1);
    const double norm1 = n1.norm();
    if (norm1 < 1e-300) {
      // Cross covariance is numerically zero; no usable top direction.
      return {0.0, 0.0};
    }
    n1 /= norm1;

    double nr2 = 0.0;
    if (dy > 1) {
      v2 -= n1.dot(v2) * n1;
      if (v2.norm() < 1e-12) {
        for (int i = 0; i < dy; ++i) v2[i] = rng.next_normal();
        v2 -= n1.dot(v2) * n1;
      }
      v2.normalize();
      Eigen::VectorXd n2 = apply_gram(v2);
      nr2 = v2.dot(n2);
      n2 -= n1.dot(n2) * n1;
      const double norm2 = n2.norm();
      if (norm2 > 1e-300) v2 = n2 / norm2;
    }

    const bool settled = step >= 10 &&
                         std::abs(nr1 - r1) <= 1e-13 * std::max(1.0, nr1) &&
                         std::abs(nr2 - r2) <= 1e-13 * std::max(1.0, nr2);
    r1 = nr1;
    r2 = nr2;
    v1 = n1;
    if (settled) break;
  }
  return {std::sqrt(std::max(0.0, r1)), std::sqrt(std::max(0.0, r2))};
}

struct PowerOutcome {
  double alpha_star = 0.0;
  Eigen::VectorXd v;
  bool finite = true;
};

// Inverse power iterations at a fixed shift; returns the warm-start scale,
// which converges to the top eigenvalue of the inverse operator. The iterate
// is plain-normalized between steps (the scale estimate is length-invariant).
PowerOutcome estimate_beta1(const ShiftedSystem& sys,
                            const Eigen::LDLT<Eigen::MatrixXd>* dense,
                            const SvrgOptions& inner, Eigen::VectorXd v, Rng& rng,
                            int max_steps) {
  PowerOutcome out;
  double alpha_prev = -1.0;
  for (int s = 0; s < max_steps; ++s) {
    if (!v.allFinite()) {
      out.finite = false;
      return out;
    }
    const double alpha = warm_start_scale(sys, v);
    if (!std::isfinite(alpha) || alpha <= 0.0) {
      out.finite = false;
      return out;
    }
    out.alpha_star = alpha;
    out.v = v;
    if (alpha_prev > 0.0 && std::abs(alpha - alpha_prev) <= 1e-10 * alpha) break;
    alpha_prev = alpha;

    if (dense != nullptr) {
      v = dense->solve(apply_B(sys.cov, v));
    } else {
      SolveTolerance tol;
      tol.ratio = 256.0;
      v = svrg_solve(sys, v, alpha * v, tol, inner, rng).w;
    }
    const double nrm = v.norm();
    if (nrm < 1e-300 || !std::isfinite(nrm)) {
      out.finite = false;
      return out;
    }
    v /= nrm;
  }
  return out;
}

}  // namespace

bool shift_certificate_holds(double lambda, double rho1, double delta, double l,
                             double u) {
  const double margin = delta / 8.0;
  const double excess = lambda - rho1;
  return excess >= l * delta + margin && excess <= u * delta - margin;
}

ShiftCertificate locate_shift(const CovarianceTriple& cov, const Dataset* data,
                              const OfflineParams& params, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, kTagLocate));
  const RhoGuess guess = power_rho_guess(cov, rng);
  const double delta = guess.rho1 - guess.rho2;
  if (!(delta >= 1e-6)) {
    throw GapTooSmall("locate_shift: estimated correlation gap below 1e-6");
  }

  const int dim = cov.d_x() + cov.d_y();
  double lambda = 1.0 + delta;
  double lambda_good = lambda;  // last shift that produced finite iterations
  double rho_est = guess.rho1;

  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.next_normal();
  v.normalize();

  for (int round = 1; round <= params.locate_rounds; ++round) {
    const double rho_ub = std::min(1.0, rho_est + 0.25 * delta);
    bool shift_too_low = lambda <= rho_ub;
    PowerOutcome po;
    if (!shift_too_low) {
      const ShiftedSystem sys =
          data != nullptr ? make_shifted_system(*data, cov, lambda, rho_ub)
                          : make_shifted_system(cov, lambda, rho_ub);
      std::optional<Eigen::LDLT<Eigen::MatrixXd>> dense;
      if (data == nullptr) {
        dense.emplace(assemble_A_lambda(cov, lambda));
        shift_too_low = dense->vectorD().minCoeff() <= 0.0;
      }
      if (!shift_too_low) {
        po = estimate_beta1(sys, dense ? &*dense : nullptr, params.inner, v, rng, 40);
        shift_too_low = !po.finite;
      }
    }
    if (shift_too_low) {
      // Overshot below the top correlation; retreat toward the last shift
      // that behaved, with a fresh iterate.
      lambda = 0.5 * (lambda + lambda_good);
      for (int i = 0; i < dim; ++i) v[i] = rng.next_normal();
      v.normalize();
      continue;
    }

    lambda_good = lambda;
    v = po.v;
    rho_est = lambda - 1.0 / po.alpha_star;
    if (shift_certificate_holds(lambda, rho_est, delta, params.l, params.u)) {
      ShiftCertificate cert;
      cert.lambda = lambda;
      cert.rho1_est = rho_est;
      cert.delta_est = delta;
      cert.rounds = round;
      return cert;
    }
    lambda = rho_est + std::max(0.5 * (params.l + params.u) * delta,
                                params.c_shift * (lambda - rho_est));
  }
  throw BracketFailure("locate_shift: no certified shift within the round budget");
}

SpectralProbe make_spectral_probe(const CovarianceTriple& cov, double lambda) {
  const int dx = cov.d_x();
  const int dy = cov.d_y();
  const int dim = dx + dy;
  const Eigen::MatrixXd a = assemble_A_lambda(cov, lambda);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.vectorD().minCoeff() <= 0.0) {
    throw InvalidShift("spectral probe: shifted matrix is not positive definite");
  }

  SpectralProbe probe;
  probe.b_half = Eigen::MatrixXd::Zero(dim, dim);
  probe.b_half.topLeftCorner(dx, dx) = spd_sqrt(cov.sxx);
  probe.b_half.bottomRightCorner(dy, dy) = spd_sqrt(cov.syy);

  Eigen::MatrixXd m = probe.b_half * ldlt.solve(probe.b_half);
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw Error("spectral probe: eigendecomposition failed");
  }
  probe.betas = es.eigenvalues().reverse();
  probe.vectors = es.eigenvectors().rowwise().reverse();
  if (probe.betas[dim - 1] <= 0.0) {
    throw InvalidShift("spectral probe: inverse operator has nonpositive spectrum");
  }
  return probe;
}

double potential_G(const SpectralProbe& probe, const Eigen::VectorXd& r) {
  const int dim = static_cast<int>(probe.betas.size());
  if (r.size() != dim) throw DimensionError("potential_G: residual size mismatch");
  const double nrm = r.norm();
  if (!(nrm > 0.0)) throw DegenerateDirection("potential_G: zero residual");

  const Eigen::VectorXd xi = probe.vectors.transpose() * (r / nrm);
  const double parallel = xi[0] * xi[0] / probe.betas[0];
  double perp = 0.0;
  for (int i = 1; i < dim; ++i) perp += xi[i] * xi[i] / probe.betas[i];
  if (parallel <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(perp / parallel);
}

CcaSolution offline_si_cca(const Dataset& data, const OfflineParams& params,
                           std::uint64_t seed, OfflineTrace* trace) {
  const CovarianceTriple cov = empirical_covariances(data);
  const int dx = cov.d_x();
  const int dy = cov.d_y();
  const int dim = dx + dy;

  ShiftCertificate shift;
  if (params.lambda_override) {
    Rng grng(Rng::derive(seed, kTagLocate));
    const RhoGuess guess = power_rho_guess(cov, grng);
    shift.lambda = *params.lambda_override;
    shift.rho1_est = params.rho1_hint ? *params.rho1_hint : guess.rho1;
    shift.delta_est = guess.rho1 - guess.rho2;
    if (shift.lambda <= shift.rho1_est) {
      throw InvalidShift("offline solver: supplied shift below the top correlation");
    }
  } else {
    shift = locate_shift(cov, params.exact_inner ? nullptr : &data, params, seed);
  }
  if (!(shift.delta_est >= 1e-6)) {
    throw GapTooSmall("offline solver: empirical gap below 1e-6");
  }

  double rho_ub = std::min(1.0, shift.rho1_est + shift.delta_est / 8.0);
  if (rho_ub >= shift.lambda) rho_ub = 0.5 * (shift.rho1_est + shift.lambda);
  ShiftedSystem sys = make_shifted_system(data, cov, shift.lambda, rho_ub);

  const double g0 = std::sqrt((shift.lambda + rho_ub) / (shift.lambda - rho_ub)) *
                    std::sqrt(static_cast<double>(dim));
  const double eta_inner = std::sqrt(params.eta / 8.0);
  const double t_real = std::ceil(std::log(g0 / eta_inner) / std::log(7.0 / 5.0));
  int t_total = t_real > 1.0 ? static_cast<int>(t_real) : 1;
  if (t_total > params.max_outer) {
    throw MaxOuterExceeded("offline solver: required outer count exceeds the cap");
  }

  Eigen::VectorXd w(dim);
  if (params.init) {
    if (params.init->size() != dim) {
      throw DimensionError("offline solver: init vector size mismatch");
    }
    w = *params.init;
  } else {
    Rng ir(Rng::derive(seed, kTagInit));
    for (int i = 0; i < dim; ++i) w[i] = ir.next_normal();
  }
  const double bnorm = std::sqrt(w.dot(apply_B(cov, w)));
  if (!(bnorm > 0.0)) throw DegenerateDirection("offline solver: zero initial iterate");
  w /= bnorm;

  std::optional<Eigen::LDLT<Eigen::MatrixXd>> dense;
  if (params.exact_inner) {
    dense.emplace(assemble_A_lambda(cov, shift.lambda));
    if (dense->vectorD().minCoeff() <= 0.0) {
      throw InvalidShift("offline solver: shifted matrix is not positive definite");
    }
  }
  std::optional<SpectralProbe> probe;
  if (params.collect_diagnostics) {
    probe = make_spectral_probe(cov, shift.lambda);
  }

  const auto record = [&](int t, double alpha) {
    if (trace == nullptr) return;
    IterateState st;
    st.w = w;
    st.t = t;
    st.alpha_star = alpha;
    if (probe) {
      SpectralView view;
      view.beta = probe->betas;
      const Eigen::VectorXd r = probe->b_half * w;
      view.xi = probe->vectors.transpose() * (r / r.norm());
      view.potential = potential_G(*probe, r);
      st.diagnostics = std::move(view);
    }
    trace->iterates.push_back(std::move(st));
  };

  Rng inner_rng(Rng::derive(seed, kTagInner));
  double rho_prev = std::numeric_limits<double>::quiet_NaN();
  int performed = 0;
  int uncertified = 0;
  bool early = false;
  for (int t = 0; t < t_total; ++t) {
    const double alpha = warm_start_scale(sys, w);
    record(t, alpha);
    if (params.exact_inner) {
      w = dense->solve(apply_B(cov, w));
    } else {
      SolveTolerance tol;
      tol.ratio = 64.0 * std::max(1.0, g0 * std::pow(5.0 / 7.0, t));
      const SvrgResult res = svrg_solve(sys, w, alpha * w, tol, params.inner, inner_rng);
      if (!res.certified) ++uncertified;
      w = res.w;
    }
    ++performed;
    const double rho_t = shift.lambda - 1.0 / alpha;
    if (params.early_exit && t >= 1 && std::abs(rho_t - rho_prev) <= 1e-12) {
      early = true;
      break;
    }
    rho_prev = rho_t;
  }
  record(performed, warm_start_scale(sys, w));

  if (trace != nullptr) {
    trace->shift = shift;
    trace->outer_iters = performed;
    trace->inner_uncertified = uncertified;
    trace->early_exit = early;
  }

  CcaSolution sol;
  sol.u = w.head(dx);
  sol.v = w.tail(dy);
  const double nu = std::sqrt(sol.u.dot(cov.sxx * sol.u));
  const double nv = std::sqrt(sol.v.dot(cov.syy * sol.v));
  if (!(nu > 0.0) || !(nv > 0.0)) {
    throw DegenerateDirection("offline solver: collapsed output direction");
  }
  sol.u /= nu;
  sol.v /= nv;
  sol.normalization = Normalization::EmpiricalUnit;
  sol.correlation_estimate = sol.u.dot(cov.sxy * sol.v);
  return sol;
}

}  // namespace sicca
