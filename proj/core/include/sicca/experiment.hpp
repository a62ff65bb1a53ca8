#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sicca/models.hpp"

namespace sicca {

/**
 * Sweep description, loadable from a sectioned key = value file:
 *
 *   [model]
 *   class = single-pair
 *   d_x = 5
 *   d_y = 5
 *   delta = 0.5
 *   seed = 1
 *   direction = e1
 *
 *   [solver]
 *   name = erm                # erm | offline-si | streaming-si
 *   eta = 1e-3                # offline-si accuracy target
 *   lambda = auto             # auto | explicit shift value
 *   safety = 1.0              # streaming-si schedule multiplier
 *   pilot = 0                 # streaming-si pilot size; 0 picks a default
 *   max_outer = 200
 *
 *   [sweep]
 *   n = 500, 1000, 2000       # sample sizes (erm, offline-si)
 *   epsilon = 0.2, 0.1        # accuracy targets (streaming-si)
 *   d = 10, 20                # optional: overrides d_x = d_y per point
 *   delta = 0.5               # optional: overrides the model correlation
 *   seeds = 1..20             # range or comma list, distinct, nonempty
 *
 *   [output]
 *   path = rows.csv
 *   timing = false            # true records wall times (breaks rerun identity)
 *
 * '#' starts a comment; unknown keys are rejected with a line diagnostic.
 */
struct ExperimentConfig {
  ModelSpec model;
  std::string solver = "erm";
  double eta = 1e-3;
  std::string lambda = "auto";
  double safety = 1.0;
  std::int64_t pilot_count = 0;
  int max_outer = 200;

  std::vector<std::int64_t> n_grid;
  std::vector<double> epsilon_grid;
  std::vector<int> d_grid;
  std::vector<double> delta_grid;
  std::vector<std::uint64_t> seeds;

  std::string output_path;
  bool timing = false;
};

ExperimentConfig parse_experiment_config(const std::string& path);

// One solver run. The n column holds the dataset size for batch solvers and
// the total stream draws for streaming-si. A nonempty error string marks a
// failed run; its metric fields are NaN.
struct ResultRow {
  std::string solver;
  int d_x = 0;
  int d_y = 0;
  double delta = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double align_pop = 0.0;
  double align_erm = 0.0;
  double corr_ratio = 0.0;
  double wall_time_ms = 0.0;
  int outer_iters = 0;
  std::string error;
};

/**
 * Runs the full grid (d x delta x {n or epsilon} x seeds, in that nesting
 * order) and returns one row per point. Solver failures are recorded in the
 * row and the sweep continues. When cfg.output_path is nonempty the rows are
 * also written there as CSV.
 */
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_rows_csv(const std::string& path);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares fit of log y on log x. Needs at least 4 distinct x values and
// strictly positive data on both axes; otherwise throws FitError.
FitResult fit_scaling(const std::vector<double>& x,
                      const std::vector<double>& y);

/**
 * Field-selecting front end for row collections: picks x from x_field
 * ("N", "d", "delta"), y from y_field ("err" meaning 1 - align_pop, or
 * "align_pop" / "align_erm" / "corr_ratio" directly), averages y over rows
 * sharing an x value, then fits. Rows with a recorded error are skipped.
 */
FitResult fit_scaling_rows(const std::vector<ResultRow>& rows,
                           const std::string& x_field,
                           const std::string& y_field);

}  // namespace sicca
