#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace sicca {

// One paired observation (x, y).
struct SamplePair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/**
 * Fixed-dimension collection of paired samples, one row per sample.
 */
class Dataset {
 public:
  Dataset(Eigen::MatrixXd xs, Eigen::MatrixXd ys);

  int d_x() const { return static_cast<int>(xs_.cols()); }
  int d_y() const { return static_cast<int>(ys_.cols()); }
  std::int64_t size() const { return xs_.rows(); }

  const Eigen::MatrixXd& xs() const { return xs_; }
  const Eigen::MatrixXd& ys() const { return ys_; }

  SamplePair pair(std::int64_t i) const;

 private:
  Eigen::MatrixXd xs_;  // n x d_x
  Eigen::MatrixXd ys_;  // n x d_y
};

// Writes "x0,...,x{d_x-1},y0,...,y{d_y-1}" then one row per sample. Values are
// printed with 17 significant digits so rereads round-trip exactly.
void write_csv(const Dataset& data, const std::string& path);

// Parses the header to recover (d_x, d_y); throws IoError on malformed input.
Dataset read_csv(const std::string& path);

// Deterministic double formatting used by all text output paths ("%.17g").
std::string format_double(double v);

}  // namespace sicca
