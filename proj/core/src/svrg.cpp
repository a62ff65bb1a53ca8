#include "sicca/svrg.hpp"

#include <algorithm>
#include <cmath>

#include "sicca/errors.hpp"

namespace sicca {

namespace {

int draw_component(const ShiftedSystem& sys, SamplingMode mode, Rng& rng) {
  const int n = static_cast<int>(sys.n());
  if (mode == SamplingMode::Uniform) {
    return static_cast<int>(rng.next_index_one_based(n) - 1);
  }
  const double u = rng.next_uniform();
  const double* begin = sys.weight_cdf.data();
  const double* end = begin + n;
  const double* it = std::upper_bound(begin, end, u);
  if (it == end) --it;
  return static_cast<int>(it - begin);
}

}  // namespace

SvrgResult svrg_solve(const ShiftedSystem& sys, const Eigen::VectorXd& w_t,
                      const Eigen::VectorXd& init, const SolveTolerance& tol,
                      const SvrgOptions& opt, Rng& rng) {
  if (sys.data == nullptr) {
    throw ConfigError("svrg_solve needs a sample-backed system");
  }
  if (!(tol.ratio >= 1.0)) throw ConfigError("svrg_solve: ratio must be >= 1");
  const int dx = sys.d_x();
  const int dy = sys.d_y();
  const int dim = dx + dy;
  if (w_t.size() != dim || init.size() != dim) {
    throw DimensionError("svrg_solve: vector sizes disagree with the system");
  }

  const Eigen::VectorXd b_wt = apply_B(sys.cov, w_t);
  const int n = static_cast<int>(sys.n());
  const int epoch_len = opt.epoch_len > 0 ? opt.epoch_len : 2 * n;
  const double step = opt.sampling == SamplingMode::Uniform
                          ? opt.step_scale / sys.max_lipschitz
                          : opt.step_scale / sys.mean_lipschitz;

  Eigen::VectorXd anchor = init;
  Eigen::VectorXd grad = apply_A_lambda(sys, anchor) - b_wt;

  const double gap0_lb = grad.squaredNorm() / (2.0 * sys.sigma_max_est);
  double target = gap0_lb / tol.ratio;
  if (tol.epsilon_t >= 0.0) {
    target = std::min(target, tol.epsilon_t * w_t.dot(b_wt));
  }

  SvrgResult res;
  res.w = anchor;
  res.gap_bound = grad.squaredNorm() / (2.0 * sys.sigma_min_est);
  double best_gap = res.gap_bound;

  Eigen::VectorXd v(dim);
  const auto& xs = sys.data->xs();
  const auto& ys = sys.data->ys();

  for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
    const double gap_ub = grad.squaredNorm() / (2.0 * sys.sigma_min_est);
    if (gap_ub <= best_gap) {
      best_gap = gap_ub;
      res.w = anchor;
      res.gap_bound = gap_ub;
    }
    if (gap_ub <= target) {
      res.certified = true;
      res.w = anchor;
      res.gap_bound = gap_ub;
      res.epochs = epoch;
      return res;
    }

    v.setZero();
    for (int s = 0; s < epoch_len; ++s) {
      const int i = draw_component(sys, opt.sampling, rng);
      const double a = xs.row(i).dot(v.head(dx));
      const double b = ys.row(i).dot(v.tail(dy));
      double scale = 1.0;
      if (opt.sampling == SamplingMode::Lipschitz) {
        const double li = sys.lipschitz[i];
        scale = sys.mean_sq_lipschitz / (li * li);
      }
      const double cx = step * scale * (sys.lambda * a - b);
      const double cy = step * scale * (sys.lambda * b - a);
      v.head(dx) -= cx * xs.row(i).transpose() + step * grad.head(dx);
      v.tail(dy) -= cy * ys.row(i).transpose() + step * grad.tail(dy);
    }
    anchor += v;
    grad = apply_A_lambda(sys, anchor) - b_wt;
    res.epochs = epoch + 1;
  }

  const double gap_ub = grad.squaredNorm() / (2.0 * sys.sigma_min_est);
  if (gap_ub <= best_gap) {
    best_gap = gap_ub;
    res.w = anchor;
    res.gap_bound = gap_ub;
  }
  if (gap_ub <= target) {
    res.certified = true;
    res.w = anchor;
    res.gap_bound = gap_ub;
  } else {
    res.hit_max_epochs = true;
  }
  return res;
}

}  // namespace sicca
