#include "sicca/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sicca/errors.hpp"
#include "sicca/whitening.hpp"

namespace sicca {

namespace {

constexpr double kStudentDof = 5.0;

void fill_standard_normal(Rng& rng, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_normal();
}

}  // namespace

SingleCanonicalPairModel::SingleCanonicalPairModel(Eigen::VectorXd phi,
                                                   Eigen::VectorXd psi,
                                                   double delta)
    : phi_(std::move(phi)), psi_(std::move(psi)), delta_(delta) {
  if (phi_.size() < 1 || psi_.size() < 1) {
    throw InvalidModel("single-pair model needs nonempty directions");
  }
  if (std::abs(phi_.norm() - 1.0) > 1e-8 || std::abs(psi_.norm() - 1.0) > 1e-8) {
    throw InvalidModel("single-pair directions must be unit length");
  }
  if (!(delta_ >= 0.0) || delta_ >= 1.0) {
    throw InvalidModel("single-pair correlation must satisfy 0 <= delta < 1, got " +
                       std::to_string(delta_));
  }
  sqrt_one_minus_delta_sq_ = std::sqrt(1.0 - delta_ * delta_);
}

void SingleCanonicalPairModel::draw(Rng& rng, Eigen::VectorXd& x,
                                    Eigen::VectorXd& y) const {
  x.resize(phi_.size());
  y.resize(psi_.size());
  fill_standard_normal(rng, x);
  fill_standard_normal(rng, y);
  // The phi component of x and the psi component of y are already standard
  // normal and independent of their orthogonal complements, so correlating
  // the pair only takes a rank-one update of y: its psi component z2 is
  // replaced by delta z1 + sqrt(1 - delta^2) z2.
  const double z1 = phi_.dot(x);
  const double z2 = psi_.dot(y);
  y += (delta_ * z1 + (sqrt_one_minus_delta_sq_ - 1.0) * z2) * psi_;
}

GeneralGaussianModel::GeneralGaussianModel(CovarianceTriple population,
                                           TailKind tail)
    : population_(std::move(population)), tail_(tail) {
  const int d_x = population_.d_x();
  const int d_y = population_.d_y();
  if ((population_.sxx - population_.sxx.transpose()).cwiseAbs().maxCoeff() >
          1e-12 ||
      (population_.syy - population_.syy.transpose()).cwiseAbs().maxCoeff() >
          1e-12) {
    throw InvalidModel("auto blocks must be symmetric");
  }
  whitened_ = whitened_operator(population_);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(population_.sxx);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(population_.syy);
  if (ex.eigenvalues().maxCoeff() > 1.0 + 1e-10 ||
      ey.eigenvalues().maxCoeff() > 1.0 + 1e-10) {
    throw InvalidModel("auto blocks must have spectral norm at most 1");
  }

  Eigen::MatrixXd joint(d_x + d_y, d_x + d_y);
  joint.topLeftCorner(d_x, d_x) = population_.sxx;
  joint.topRightCorner(d_x, d_y) = population_.sxy;
  joint.bottomLeftCorner(d_y, d_x) = population_.sxy.transpose();
  joint.bottomRightCorner(d_y, d_y) = population_.syy;
  Eigen::LLT<Eigen::MatrixXd> llt(joint);
  if (llt.info() != Eigen::Success) {
    throw InvalidModel("joint covariance is not positive definite");
  }
  joint_chol_ = llt.matrixL();
}

void GeneralGaussianModel::draw(Rng& rng, Eigen::VectorXd& x,
                                Eigen::VectorXd& y) const {
  const int d_x = population_.d_x();
  const int d_y = population_.d_y();
  Eigen::VectorXd z(d_x + d_y);
  fill_standard_normal(rng, z);
  if (tail_ == TailKind::StudentT) {
    // Whitened multivariate t with unit second moment: scale the Gaussian by
    // sqrt((dof - 2) / chi2_dof) before coloring.
    double chi2 = 0.0;
    for (int k = 0; k < static_cast<int>(kStudentDof); ++k) {
      const double g = rng.next_normal();
      chi2 += g * g;
    }
    z *= std::sqrt((kStudentDof - 2.0) / chi2);
  }
  const Eigen::VectorXd w = joint_chol_ * z;
  x = w.head(d_x);
  y = w.tail(d_y);
}

BoundedModel::BoundedModel(GeneralGaussianModel base) : base_(std::move(base)) {
  // Prescale so the clip at radius 1 is a rare event rather than a routine
  // distortion: mean squared norms end up at most 1/8.
  const double trace_total =
      base_.population().sxx.trace() + base_.population().syy.trace();
  prescale_ = std::sqrt(8.0 * trace_total);
}

void BoundedModel::draw(Rng& rng, Eigen::VectorXd& x,
                        Eigen::VectorXd& y) const {
  base_.draw(rng, x, y);
  x /= prescale_;
  y /= prescale_;
  const double s =
      std::max({truncation_radius_, x.norm(), y.norm()}) / truncation_radius_;
  if (s > 1.0) {
    x /= s;
    y /= s;
  }
}

namespace {

template <typename M>
Dataset sample_impl(const M& model, std::int64_t n, std::uint64_t seed) {
  if (n < 0) {
    throw InsufficientSamples("sample count must be nonnegative");
  }
  Rng rng(seed);
  Eigen::MatrixXd xs(n, model.d_x());
  Eigen::MatrixXd ys(n, model.d_y());
  Eigen::VectorXd x(model.d_x());
  Eigen::VectorXd y(model.d_y());
  for (std::int64_t i = 0; i < n; ++i) {
    model.draw(rng, x, y);
    xs.row(i) = x.transpose();
    ys.row(i) = y.transpose();
  }
  return Dataset(std::move(xs), std::move(ys));
}

}  // namespace

Dataset sample_single_canonical_pair(const SingleCanonicalPairModel& model,
                                     std::int64_t n, std::uint64_t seed) {
  return sample_impl(model, n, seed);
}

Dataset sample_general_gaussian(const GeneralGaussianModel& model,
                                std::int64_t n, std::uint64_t seed) {
  return sample_impl(model, n, seed);
}

Dataset sample_bounded(const BoundedModel& model, std::int64_t n,
                       std::uint64_t seed) {
  return sample_impl(model, n, seed);
}

Dataset sample_dataset(const Model& model, std::int64_t n, std::uint64_t seed) {
  return std::visit([&](const auto& m) { return sample_impl(m, n, seed); },
                    model);
}

PopulationSolution population_solution(const SingleCanonicalPairModel& model) {
  if (model.delta() < 1e-12) {
    throw GapTooSmall("single-pair model has zero correlation gap");
  }
  PopulationSolution out;
  out.solution.u = model.phi();
  out.solution.v = model.psi();
  out.solution.normalization = Normalization::PopulationUnit;
  out.solution.correlation_estimate = model.delta();
  out.conditioning.rho1 = model.delta();
  out.conditioning.gap = model.delta();
  out.conditioning.gamma = 1.0;
  return out;
}

PopulationSolution population_solution(const GeneralGaussianModel& model) {
  const WhitenedOperator& op = model.whitened();
  const double gap = singular_gap(op);
  if (gap < 1e-12) {
    throw GapTooSmall("population operator has (near) zero singular gap");
  }
  PopulationSolution out;
  out.solution.u = op.inv_sqrt_xx * op.left_vectors.col(0);
  out.solution.v = op.inv_sqrt_yy * op.right_vectors.col(0);
  out.solution.normalization = Normalization::PopulationUnit;
  out.solution.correlation_estimate = op.singular_values(0);
  out.conditioning = conditioning_of(op, model.population());
  return out;
}

PopulationSolution population_solution(const BoundedModel& model) {
  // Reference for the prescaled base distribution; the rare clip is ignored.
  PopulationSolution out = population_solution(model.base());
  const double c = model.prescale();
  out.solution.u *= c;
  out.solution.v *= c;
  out.conditioning.gamma /= c * c;
  return out;
}

PopulationSolution population_solution(const Model& model) {
  return std::visit([](const auto& m) { return population_solution(m); },
                    model);
}

int model_d_x(const Model& model) {
  return std::visit([](const auto& m) { return m.d_x(); }, model);
}

int model_d_y(const Model& model) {
  return std::visit([](const auto& m) { return m.d_y(); }, model);
}

void model_draw(const Model& model, Rng& rng, Eigen::VectorXd& x,
                Eigen::VectorXd& y) {
  std::visit([&](const auto& m) { m.draw(rng, x, y); }, model);
}

CovarianceTriple population_covariances(const SingleCanonicalPairModel& model) {
  CovarianceTriple cov;
  cov.sxx = Eigen::MatrixXd::Identity(model.d_x(), model.d_x());
  cov.syy = Eigen::MatrixXd::Identity(model.d_y(), model.d_y());
  cov.sxy = model.delta() * model.phi() * model.psi().transpose();
  return cov;
}

CovarianceTriple population_covariances(const GeneralGaussianModel& model) {
  return model.population();
}

CovarianceTriple population_covariances(const BoundedModel& model) {
  // Second moments of the prescaled draws; the rare clip is ignored, matching
  // the population_solution convention.
  CovarianceTriple cov = model.base().population();
  const double c2 = model.prescale() * model.prescale();
  cov.sxx /= c2;
  cov.sxy /= c2;
  cov.syy /= c2;
  return cov;
}

CovarianceTriple population_covariances(const Model& model) {
  return std::visit([](const auto& m) { return population_covariances(m); },
                    model);
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ModelSpec parse_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open model file: " + path);
  }
  ModelSpec spec;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.front() == '[' && stripped.back() == ']') {
      if (trim(stripped.substr(1, stripped.size() - 2)) != "model") {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unexpected section '" + stripped + "'");
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (seen[key]) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    seen[key] = true;
    try {
      if (key == "class") {
        spec.model_class = value;
      } else if (key == "d_x") {
        spec.d_x = std::stoi(value);
      } else if (key == "d_y") {
        spec.d_y = std::stoi(value);
      } else if (key == "delta") {
        spec.delta = std::stod(value);
      } else if (key == "seed") {
        spec.structure_seed = std::stoull(value);
      } else if (key == "direction") {
        spec.direction = value;
      } else {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": cannot parse value '" + value + "' for key '" +
                        key + "'");
    }
  }
  if (!seen["class"] || !seen["d_x"] || !seen["d_y"] || !seen["delta"]) {
    throw ConfigError(path + ": model file needs class, d_x, d_y and delta");
  }
  return spec;
}

void write_model_spec(const ModelSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << "class = " << spec.model_class << "\n";
  out << "d_x = " << spec.d_x << "\n";
  out << "d_y = " << spec.d_y << "\n";
  out << "delta = " << format_double(spec.delta) << "\n";
  out << "seed = " << spec.structure_seed << "\n";
  if (spec.model_class == "single-pair") {
    out << "direction = " << spec.direction << "\n";
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

namespace {

Eigen::VectorXd random_unit(Rng& rng, int d) {
  Eigen::VectorXd v(d);
  fill_standard_normal(rng, v);
  const double n = v.norm();
  if (n < 1e-12) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / n;
}

Eigen::MatrixXd random_orthogonal(Rng& rng, int d) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.next_normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

// Seeded dense instance with prescribed top correlation: random well
// conditioned auto blocks, random singular bases for the whitened operator,
// sigma_1 = delta and the rest at most 0.7 * delta (so the gap is at least
// 0.3 * delta).
CovarianceTriple random_general_triple(int d_x, int d_y, double delta,
                                       std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x67656e65ULL));
  const Eigen::MatrixXd qx = random_orthogonal(rng, d_x);
  const Eigen::MatrixXd qy = random_orthogonal(rng, d_y);
  Eigen::VectorXd lx(d_x);
  Eigen::VectorXd ly(d_y);
  for (int i = 0; i < d_x; ++i) lx(i) = 0.35 + 0.65 * rng.next_uniform();
  for (int i = 0; i < d_y; ++i) ly(i) = 0.35 + 0.65 * rng.next_uniform();

  CovarianceTriple cov;
  cov.sxx = qx * lx.asDiagonal() * qx.transpose();
  cov.syy = qy * ly.asDiagonal() * qy.transpose();
  cov.sxx = 0.5 * (cov.sxx + cov.sxx.transpose()).eval();
  cov.syy = 0.5 * (cov.syy + cov.syy.transpose()).eval();

  const int r = std::min(d_x, d_y);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(r);
  if (r > 0) sigma(0) = delta;
  for (int i = 1; i < r; ++i) sigma(i) = 0.7 * delta * rng.next_uniform();
  std::sort(sigma.data() + 1, sigma.data() + r, std::greater<double>());

  const Eigen::MatrixXd ux = random_orthogonal(rng, d_x).leftCols(r);
  const Eigen::MatrixXd vy = random_orthogonal(rng, d_y).leftCols(r);
  const Eigen::MatrixXd t = ux * sigma.asDiagonal() * vy.transpose();
  cov.sxy = spd_sqrt(cov.sxx) * t * spd_sqrt(cov.syy);
  cov.centered = false;
  cov.n = 0;
  return cov;
}

}  // namespace

Model build_model(const ModelSpec& spec) {
  if (spec.d_x < 1 || spec.d_y < 1) {
    throw InvalidModel("model dimensions must be positive");
  }
  if (spec.model_class == "single-pair") {
    Eigen::VectorXd phi;
    Eigen::VectorXd psi;
    if (spec.direction == "e1") {
      phi = Eigen::VectorXd::Zero(spec.d_x);
      psi = Eigen::VectorXd::Zero(spec.d_y);
      phi(0) = 1.0;
      psi(0) = 1.0;
    } else if (spec.direction == "random") {
      Rng rp(Rng::derive(spec.structure_seed, 0x706869ULL));
      Rng rq(Rng::derive(spec.structure_seed, 0x707369ULL));
      phi = random_unit(rp, spec.d_x);
      psi = random_unit(rq, spec.d_y);
    } else {
      throw ConfigError("unknown direction '" + spec.direction +
                        "' (want e1 or random)");
    }
    return SingleCanonicalPairModel(std::move(phi), std::move(psi), spec.delta);
  }
  if (spec.model_class == "general" || spec.model_class == "polynomial-tail" ||
      spec.model_class == "bounded") {
    CovarianceTriple cov = random_general_triple(spec.d_x, spec.d_y, spec.delta,
                                                 spec.structure_seed);
    const TailKind tail = spec.model_class == "polynomial-tail"
                              ? TailKind::StudentT
                              : TailKind::Gaussian;
    GeneralGaussianModel base(std::move(cov), tail);
    if (spec.model_class == "bounded") {
      return BoundedModel(std::move(base));
    }
    return base;
  }
  throw ConfigError("unknown model class '" + spec.model_class + "'");
}

}  // namespace sicca
