#include "sicca/stream.hpp"

#include <cstdlib>
#include <sstream>
#include <vector>

#include "sicca/errors.hpp"

namespace sicca {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

ModelStream::ModelStream(Model model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {}

int ModelStream::d_x() const { return model_d_x(model_); }
int ModelStream::d_y() const { return model_d_y(model_); }

void ModelStream::next(Eigen::VectorXd& x, Eigen::VectorXd& y) {
  model_draw(model_, rng_, x, y);
  ++consumed_;
}

CsvStream::CsvStream(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw IoError("cannot open stream file: " + path);
  if (!std::getline(in_, line_)) throw IoError("empty stream file: " + path);
  const std::vector<std::string> names = split_fields(line_);
  std::size_t i = 0;
  while (i < names.size() && names[i] == "x" + std::to_string(i)) ++i;
  d_x_ = static_cast<int>(i);
  std::size_t j = 0;
  while (i + j < names.size() && names[i + j] == "y" + std::to_string(j)) ++j;
  d_y_ = static_cast<int>(j);
  if (d_x_ == 0 || d_y_ == 0 || i + j != names.size()) {
    throw IoError("malformed stream header in " + path);
  }
}

void CsvStream::next(Eigen::VectorXd& x, Eigen::VectorXd& y) {
  if (x.size() != d_x_ || y.size() != d_y_) {
    throw DimensionError("stream draw into wrong-sized buffers");
  }
  do {
    if (!std::getline(in_, line_)) {
      throw StreamExhausted("stream file exhausted: " + path_);
    }
  } while (line_.empty());

  const char* p = line_.c_str();
  for (int k = 0; k < d_x_ + d_y_; ++k) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) throw IoError("malformed stream row in " + path_);
    (k < d_x_ ? x[k] : y[k - d_x_]) = v;
    p = end;
    if (*p == ',') ++p;
  }
  ++consumed_;
}

std::unique_ptr<SampleStream> open_model_stream(const std::string& model_path,
                                                std::uint64_t seed) {
  return std::make_unique<ModelStream>(build_model(parse_model_spec(model_path)),
                                       seed);
}

std::unique_ptr<SampleStream> open_csv_stream(const std::string& data_path) {
  return std::make_unique<CsvStream>(data_path);
}

}  // namespace sicca
