#include "sicca/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "sicca/errors.hpp"

namespace sicca {

Dataset::Dataset(Eigen::MatrixXd xs, Eigen::MatrixXd ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.rows() != ys_.rows()) {
    throw DimensionError("dataset blocks disagree on sample count: " +
                         std::to_string(xs_.rows()) + " vs " +
                         std::to_string(ys_.rows()));
  }
}

SamplePair Dataset::pair(std::int64_t i) const {
  if (i < 0 || i >= size()) {
    throw DimensionError("sample index out of range: " + std::to_string(i));
  }
  return SamplePair{xs_.row(i).transpose(), ys_.row(i).transpose()};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  for (int j = 0; j < data.d_x(); ++j) {
    out << (j ? "," : "") << "x" << j;
  }
  for (int j = 0; j < data.d_y(); ++j) {
    out << ",y" << j;
  }
  out << "\n";
  for (std::int64_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.d_x(); ++j) {
      if (j) out << ",";
      out << format_double(data.xs()(i, j));
    }
    for (int j = 0; j < data.d_y(); ++j) {
      out << "," << format_double(data.ys()(i, j));
    }
    out << "\n";
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty file: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  int d_x = 0;
  int d_y = 0;
  for (const auto& name : header) {
    const std::string expected =
        (d_y == 0 && name.rfind("x", 0) == 0 ? "x" + std::to_string(d_x)
                                             : "y" + std::to_string(d_y));
    if (name != expected) {
      throw IoError(path + ": unexpected header field '" + name +
                    "', wanted '" + expected + "'");
    }
    if (name[0] == 'x') {
      ++d_x;
    } else {
      ++d_y;
    }
  }
  if (d_x == 0 || d_y == 0) {
    throw IoError(path + ": header must list x columns then y columns");
  }

  std::vector<double> values;
  std::int64_t rows = 0;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d_x + d_y) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(d_x + d_y) + " fields, got " +
                    std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != f.size() || f.empty()) {
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": not a number: '" + f + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }

  Eigen::MatrixXd xs(rows, d_x);
  Eigen::MatrixXd ys(rows, d_y);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (int j = 0; j < d_x; ++j) xs(i, j) = values[i * (d_x + d_y) + j];
    for (int j = 0; j < d_y; ++j) ys(i, j) = values[i * (d_x + d_y) + d_x + j];
  }
  return Dataset(std::move(xs), std::move(ys));
}

}  // namespace sicca
