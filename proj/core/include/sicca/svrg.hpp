#pragma once

#include <Eigen/Core>

#include "sicca/rng.hpp"
#include "sicca/shifted_system.hpp"

namespace sicca {

enum class SamplingMode { Uniform, Lipschitz };

struct SvrgOptions {
  int epoch_len = 0;  // 0 selects 2N
  double step_scale = 0.1;
  int max_epochs = 64;
  SamplingMode sampling = SamplingMode::Lipschitz;
};

/**
 * Inner-solve accuracy request. ratio is the required factor between the
 * initial and final objective gap; epsilon_t, when non-negative, adds an
 * absolute gap target of epsilon_t * (w_t'Bw_t). The solver stops at
 * whichever is tighter.
 */
struct SolveTolerance {
  double ratio = 64.0;
  double epsilon_t = -1.0;
};

struct SvrgResult {
  Eigen::VectorXd w;
  int epochs = 0;
  bool certified = false;
  bool hit_max_epochs = false;
  double gap_bound = 0.0;  // certified upper bound on f(w) - f* at return
};

/**
 * Variance-reduced stochastic solver for f(w) = w'Aw/2 - w'Bw_t over the
 * finite sample sum. Each epoch refreshes the exact gradient at the anchor
 * and takes epoch_len component steps; components are drawn uniformly or
 * proportionally to squared per-sample Lipschitz constants with the matching
 * importance correction. Termination is certified through the computable
 * surrogate |grad f|^2 / (2 sigma_min_est), which upper-bounds the true gap.
 * Hitting max_epochs is reported via a flag and returns the best anchor seen.
 */
SvrgResult svrg_solve(const ShiftedSystem& sys, const Eigen::VectorXd& w_t,
                      const Eigen::VectorXd& init, const SolveTolerance& tol,
                      const SvrgOptions& opt, Rng& rng);

}  // namespace sicca
