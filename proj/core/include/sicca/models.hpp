#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>

#include "sicca/covariance.hpp"
#include "sicca/dataset.hpp"
#include "sicca/metrics.hpp"
#include "sicca/rng.hpp"

namespace sicca {

// Population optimum of a synthetic model plus its conditioning numbers.
struct PopulationSolution {
  CcaSolution solution;  // PopulationUnit normalization
  ProblemConditioning conditioning;
};

/**
 * Joint Gaussian with identity auto blocks and a rank-one cross block
 * delta * phi * psi'. The canonical pair is (phi, psi) with correlation
 * delta; requires unit phi, psi and 0 < delta < 1.
 *
 * Draws run in O(d) using the closed-form square root of the joint
 * covariance: only the components of x along phi and of y along psi are
 * correlated, everything orthogonal stays white.
 */
class SingleCanonicalPairModel {
 public:
  SingleCanonicalPairModel(Eigen::VectorXd phi, Eigen::VectorXd psi,
                           double delta);

  int d_x() const { return static_cast<int>(phi_.size()); }
  int d_y() const { return static_cast<int>(psi_.size()); }
  double delta() const { return delta_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& psi() const { return psi_; }

  // Fills preallocated x, y with one joint draw.
  void draw(Rng& rng, Eigen::VectorXd& x, Eigen::VectorXd& y) const;

 private:
  Eigen::VectorXd phi_;
  Eigen::VectorXd psi_;
  double delta_;
  double sqrt_one_minus_delta_sq_ = 1.0;
};

enum class TailKind { Gaussian, StudentT };

/**
 * Dense joint Gaussian model built from an explicit covariance triple.
 * Validates positive definiteness of the joint covariance (via Cholesky)
 * and spectral norms of the auto blocks at most 1. With TailKind::StudentT
 * the whitened variable is multivariate t with 5 degrees of freedom, scaled
 * to unit second moment, then colored by the same Cholesky factor.
 */
class GeneralGaussianModel {
 public:
  GeneralGaussianModel(CovarianceTriple population,
                       TailKind tail = TailKind::Gaussian);

  int d_x() const { return population_.d_x(); }
  int d_y() const { return population_.d_y(); }
  const CovarianceTriple& population() const { return population_; }
  const WhitenedOperator& whitened() const { return whitened_; }
  TailKind tail() const { return tail_; }

  void draw(Rng& rng, Eigen::VectorXd& x, Eigen::VectorXd& y) const;

 private:
  CovarianceTriple population_;
  WhitenedOperator whitened_;
  Eigen::MatrixXd joint_chol_;  // lower factor of the joint covariance
  TailKind tail_;
};

/**
 * Almost-surely bounded wrapper: the base model's draws are prescaled by a
 * constant c chosen so that norms above 1 are rare, then jointly clipped by
 * s = max(1, |x|, |y|), giving sup-norm bounds |x|, |y| <= 1 exactly.
 * The reported population solution refers to the prescaled base (the clip
 * affects a negligible fraction of draws and is ignored).
 */
class BoundedModel {
 public:
  explicit BoundedModel(GeneralGaussianModel base);

  int d_x() const { return base_.d_x(); }
  int d_y() const { return base_.d_y(); }
  const GeneralGaussianModel& base() const { return base_; }
  double truncation_radius() const { return truncation_radius_; }
  double prescale() const { return prescale_; }

  void draw(Rng& rng, Eigen::VectorXd& x, Eigen::VectorXd& y) const;

 private:
  GeneralGaussianModel base_;
  double prescale_;  // divides every base draw before clipping
  double truncation_radius_ = 1.0;
};

using Model =
    std::variant<SingleCanonicalPairModel, GeneralGaussianModel, BoundedModel>;

// Batch samplers. One fresh generator per dataset, seeded with `seed`.
Dataset sample_single_canonical_pair(const SingleCanonicalPairModel& model,
                                     std::int64_t n, std::uint64_t seed);
Dataset sample_general_gaussian(const GeneralGaussianModel& model,
                                std::int64_t n, std::uint64_t seed);
Dataset sample_bounded(const BoundedModel& model, std::int64_t n,
                       std::uint64_t seed);
Dataset sample_dataset(const Model& model, std::int64_t n, std::uint64_t seed);

// Exact optimum of the sampling distribution; throws GapTooSmall when the
// top correlation is not separated from the second.
PopulationSolution population_solution(const SingleCanonicalPairModel& model);
PopulationSolution population_solution(const GeneralGaussianModel& model);
PopulationSolution population_solution(const BoundedModel& model);
PopulationSolution population_solution(const Model& model);

int model_d_x(const Model& model);
int model_d_y(const Model& model);
void model_draw(const Model& model, Rng& rng, Eigen::VectorXd& x,
                Eigen::VectorXd& y);

// Exact second-moment triple of the sampling distribution. For bounded models
// this is the prescaled-base triple (the clip acts on a negligible fraction).
CovarianceTriple population_covariances(const SingleCanonicalPairModel& model);
CovarianceTriple population_covariances(const GeneralGaussianModel& model);
CovarianceTriple population_covariances(const BoundedModel& model);
CovarianceTriple population_covariances(const Model& model);

/**
 * Key-value description of a synthetic model, loadable from a text file:
 *
 *   class = single-pair        # single-pair | general | bounded | polynomial-tail
 *   d_x = 5
 *   d_y = 5
 *   delta = 0.5
 *   seed = 7                   # structure seed (directions, random blocks)
 *   direction = e1             # single-pair only: e1 | random
 *
 * Lines starting with '#' and blank lines are ignored; an optional [model]
 * section header is accepted.
 */
struct ModelSpec {
  std::string model_class = "single-pair";
  int d_x = 0;
  int d_y = 0;
  double delta = 0.0;
  std::uint64_t structure_seed = 0;
  std::string direction = "e1";
};

ModelSpec parse_model_spec(const std::string& path);
void write_model_spec(const ModelSpec& spec, const std::string& path);

// Instantiates the described model. "general" and descendants draw their
// covariance structure deterministically from the structure seed with top
// correlation exactly delta.
Model build_model(const ModelSpec& spec);

}  // namespace sicca
