#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>

#include "sicca/models.hpp"
#include "sicca/rng.hpp"

namespace sicca {

/**
 * Pull-based source of paired samples. Draws are delivered strictly in order,
 * each one exactly once; samples_consumed() counts every delivered pair.
 */
class SampleStream {
 public:
  virtual ~SampleStream() = default;

  virtual int d_x() const = 0;
  virtual int d_y() const = 0;

  // Fills preallocated x (size d_x) and y (size d_y) with the next pair.
  virtual void next(Eigen::VectorXd& x, Eigen::VectorXd& y) = 0;

  std::uint64_t samples_consumed() const { return consumed_; }

 protected:
  std::uint64_t consumed_ = 0;
};

// Unbounded stream of fresh draws from a synthetic model.
class ModelStream : public SampleStream {
 public:
  ModelStream(Model model, std::uint64_t seed);

  int d_x() const override;
  int d_y() const override;
  void next(Eigen::VectorXd& x, Eigen::VectorXd& y) override;

  const Model& model() const { return model_; }

 private:
  Model model_;
  Rng rng_;
};

/**
 * Replays a CSV file (write_csv layout) once, front to back, parsing one row
 * per draw so memory stays proportional to the row width. Throws
 * StreamExhausted when the file runs out and IoError on malformed rows.
 */
class CsvStream : public SampleStream {
 public:
  explicit CsvStream(const std::string& path);

  int d_x() const override { return d_x_; }
  int d_y() const override { return d_y_; }
  void next(Eigen::VectorXd& x, Eigen::VectorXd& y) override;

 private:
  std::ifstream in_;
  std::string path_;
  std::string line_;
  int d_x_ = 0;
  int d_y_ = 0;
};

// Factories behind the CLI stream options.
std::unique_ptr<SampleStream> open_model_stream(const std::string& model_path,
                                                std::uint64_t seed);
std::unique_ptr<SampleStream> open_csv_stream(const std::string& data_path);

}  // namespace sicca
