#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "sicca/covariance.hpp"
#include "sicca/erm.hpp"
#include "sicca/errors.hpp"
#include "sicca/experiment.hpp"
#include "sicca/metrics.hpp"
#include "sicca/offline.hpp"
#include "sicca/streaming.hpp"

namespace sicca {

namespace {

constexpr std::uint64_t kTagStream = 0x6574726dULL;

const char* kCsvHeader =
    "solver,d_x,d_y,delta,N,seed,align_pop,align_erm,corr_ratio,wall_time_ms,"
    "outer_iters,error";

double auto_lambda(const PopulationSolution& pop) {
  return pop.conditioning.rho1 + 0.5 * pop.conditioning.gap;
}

double parse_lambda(const std::string& text, const PopulationSolution& pop) {
  if (text == "auto") return auto_lambda(pop);
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw ConfigError("lambda must be 'auto' or a number, got '" + text + "'");
  }
}

// Canonical pairs are defined up to a joint sign flip of (u, v), so the
// reported alignment is the flip-invariant magnitude.
double signed_free_align(const CcaSolution& sol, const CcaSolution& ref,
                         const CovarianceTriple& cov) {
  return std::abs(align(sol, ref, cov));
}

struct RowOutcome {
  double align_pop;
  double align_erm;
  double corr_ratio;
  std::int64_t n;
  int outer_iters;
};

RowOutcome solve_point(const ExperimentConfig& cfg, const Model& model,
                       const PopulationSolution& pop, std::int64_t n,
                       double epsilon, std::uint64_t seed) {
  const CovarianceTriple pop_cov = population_covariances(model);
  RowOutcome out{};
  if (cfg.solver == "erm") {
    const Dataset data = sample_dataset(model, n, seed);
    const CcaSolution sol = solve_erm_exact(empirical_covariances(data));
    out.align_pop = signed_free_align(sol, pop.solution, pop_cov);
    out.align_erm = 1.0;
    out.corr_ratio = correlation_ratio(sol, pop_cov);
    out.n = n;
    out.outer_iters = 0;
  } else if (cfg.solver == "offline-si") {
    const Dataset data = sample_dataset(model, n, seed);
    const CovarianceTriple emp = empirical_covariances(data);
    OfflineParams params;
    params.eta = cfg.eta;
    params.max_outer = cfg.max_outer;
    if (cfg.lambda != "auto") params.lambda_override = std::stod(cfg.lambda);
    OfflineTrace trace;
    const CcaSolution sol = offline_si_cca(data, params, seed, &trace);
    const CcaSolution erm = solve_erm_exact(emp);
    out.align_pop = signed_free_align(sol, pop.solution, pop_cov);
    out.align_erm = signed_free_align(sol, erm, emp);
    out.corr_ratio = correlation_ratio(sol, pop_cov);
    out.n = n;
    out.outer_iters = trace.outer_iters;
  } else {
    ModelStream stream(model, Rng::derive(seed, kTagStream));
    StreamingParams params;
    params.epsilon = epsilon;
    params.lambda = parse_lambda(cfg.lambda, pop);
    params.pilot_count = cfg.pilot_count;
    params.safety = cfg.safety;
    params.max_outer = cfg.max_outer;
    const StreamingReport report = streaming_si_cca(stream, params, seed);
    out.align_pop = signed_free_align(report.solution, pop.solution, pop_cov);
    out.align_erm = std::numeric_limits<double>::quiet_NaN();
    out.corr_ratio = correlation_ratio(report.solution, pop_cov);
    out.n = static_cast<std::int64_t>(report.samples_used);
    out.outer_iters = report.outer_iters;
  }
  return out;
}

std::string sanitize_error(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) {
    throw ConfigError("run_experiment: seed list is empty");
  }
  const bool streaming_solver = cfg.solver == "streaming-si";
  if (streaming_solver ? cfg.epsilon_grid.empty() : cfg.n_grid.empty()) {
    throw ConfigError("run_experiment: sweep grid is empty");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> d_points = cfg.d_grid;
  if (d_points.empty()) d_points.push_back(0);  // keep the model dimensions
  std::vector<double> delta_points = cfg.delta_grid;
  if (delta_points.empty()) delta_points.push_back(cfg.model.delta);
  const bool streaming = cfg.solver == "streaming-si";
  const std::size_t inner_count =
      streaming ? cfg.epsilon_grid.size() : cfg.n_grid.size();

  std::vector<ResultRow> rows;
  for (int d : d_points) {
    for (double delta : delta_points) {
      ModelSpec spec = cfg.model;
      if (d > 0) {
        spec.d_x = d;
        spec.d_y = d;
      }
      spec.delta = delta;
      for (std::size_t i = 0; i < inner_count; ++i) {
        const std::int64_t n = streaming ? 0 : cfg.n_grid[i];
        const double epsilon = streaming ? cfg.epsilon_grid[i] : 0.0;
        for (std::uint64_t seed : cfg.seeds) {
          ResultRow row;
          row.solver = cfg.solver;
          row.d_x = spec.d_x;
          row.d_y = spec.d_y;
          row.delta = delta;
          row.n = n;
          row.seed = seed;
          row.align_pop = nan;
          row.align_erm = nan;
          row.corr_ratio = nan;
          try {
            const Model model = build_model(spec);
            const PopulationSolution pop = population_solution(model);
            const auto start = std::chrono::steady_clock::now();
            const RowOutcome outcome =
                solve_point(cfg, model, pop, n, epsilon, seed);
            if (cfg.timing) {
              const auto end = std::chrono::steady_clock::now();
              row.wall_time_ms =
                  std::chrono::duration<double, std::milli>(end - start)
                      .count();
            }
            row.align_pop = outcome.align_pop;
            row.align_erm = outcome.align_erm;
            row.corr_ratio = outcome.corr_ratio;
            row.n = outcome.n;
            row.outer_iters = outcome.outer_iters;
          } catch (const Error& e) {
            row.error = sanitize_error(e.what());
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  if (!cfg.output_path.empty()) {
    write_rows_csv(rows, cfg.output_path);
  }
  return rows;
}

void write_rows_csv(const std::vector<ResultRow>& rows,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << kCsvHeader << "\n";
  for (const ResultRow& row : rows) {
    out << row.solver << ',' << row.d_x << ',' << row.d_y << ','
        << format_double(row.delta) << ',' << row.n << ',' << row.seed << ','
        << format_double(row.align_pop) << ',' << format_double(row.align_erm)
        << ',' << format_double(row.corr_ratio) << ','
        << format_double(row.wall_time_ms) << ',' << row.outer_iters << ','
        << row.error << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ResultRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rows file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw IoError("unexpected rows header in " + path);
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 12) {
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected 12 columns");
    }
    try {
      ResultRow row;
      row.solver = f[0];
      row.d_x = std::stoi(f[1]);
      row.d_y = std::stoi(f[2]);
      row.delta = std::stod(f[3]);
      row.n = std::stoll(f[4]);
      row.seed = std::stoull(f[5]);
      row.align_pop = std::stod(f[6]);
      row.align_erm = std::stod(f[7]);
      row.corr_ratio = std::stod(f[8]);
      row.wall_time_ms = std::stod(f[9]);
      row.outer_iters = std::stoi(f[10]);
      row.error = f[11];
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return rows;
}

FitResult fit_scaling(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw FitError("fit needs matching x and y lengths");
  }
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < 4) {
    throw FitError("fit needs at least 4 distinct x values");
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw FitError("fit needs strictly positive x and y");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ss_res += resid * resid;
    }
    fit.r2 = 1.0 - ss_res / syy;
  } else {
    fit.r2 = 1.0;
  }
  return fit;
}

FitResult fit_scaling_rows(const std::vector<ResultRow>& rows,
                           const std::string& x_field,
                           const std::string& y_field) {
  const auto x_of = [&](const ResultRow& row) -> double {
    if (x_field == "N") return static_cast<double>(row.n);
    if (x_field == "d") return static_cast<double>(row.d_x);
    if (x_field == "delta") return row.delta;
    throw ConfigError("unknown fit x field '" + x_field + "'");
  };
  const auto y_of = [&](const ResultRow& row) -> double {
    if (y_field == "err") return 1.0 - row.align_pop;
    if (y_field == "align_pop") return row.align_pop;
    if (y_field == "align_erm") return row.align_erm;
    if (y_field == "corr_ratio") return row.corr_ratio;
    throw ConfigError("unknown fit y field '" + y_field + "'");
  };

  std::map<double, std::pair<double, std::int64_t>> groups;
  for (const ResultRow& row : rows) {
    if (!row.error.empty()) continue;
    auto& acc = groups[x_of(row)];
    acc.first += y_of(row);
    acc.second += 1;
  }
  std::vector<double> xs, ys;
  for (const auto& [xval, acc] : groups) {
    xs.push_back(xval);
    ys.push_back(acc.first / static_cast<double>(acc.second));
  }
  return fit_scaling(xs, ys);
}

}  // namespace sicca
