#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sicca/covariance.hpp"
#include "sicca/erm.hpp"
#include "sicca/errors.hpp"
#include "sicca/experiment.hpp"
#include "sicca/metrics.hpp"
#include "sicca/models.hpp"
#include "sicca/offline.hpp"
#include "sicca/stream.hpp"
#include "sicca/streaming.hpp"

namespace {

constexpr std::uint64_t kTagStream = 0x6574726dULL;

const char* normalization_name(sicca::Normalization n) {
  switch (n) {
    case sicca::Normalization::EmpiricalUnit:
      return "empirical-unit";
    case sicca::Normalization::PopulationUnit:
      return "population-unit";
    default:
      return "unnormalized";
  }
}

void write_solution_json(const sicca::CcaSolution& sol, double rho1,
                         const std::string& out_path) {
  nlohmann::json j;
  j["u"] = std::vector<double>(sol.u.data(), sol.u.data() + sol.u.size());
  j["v"] = std::vector<double>(sol.v.data(), sol.v.data() + sol.v.size());
  j["rho1"] = rho1;
  j["normalization"] = normalization_name(sol.normalization);
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw sicca::IoError("cannot open for writing: " + out_path);
  out << j.dump(2) << "\n";
  if (!out) throw sicca::IoError("write failed: " + out_path);
}

double parse_lambda_number(const std::string& text) {
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw sicca::ConfigError("lambda must be 'auto' or a number");
  }
}

double lambda_from_model(const std::string& lambda_text,
                         const sicca::Model& model) {
  if (lambda_text != "auto") return parse_lambda_number(lambda_text);
  const sicca::PopulationSolution pop = sicca::population_solution(model);
  return pop.conditioning.rho1 + 0.5 * pop.conditioning.gap;
}

struct Options {
  std::string model_path;
  std::string data_path;
  std::string config_path;
  std::string out_path;
  std::string lambda = "auto";
  std::string tail = "subgaussian";
  std::string x_field;
  std::string y_field;
  std::int64_t n = 0;
  std::int64_t pilot = 0;
  std::uint64_t seed = 0;
  double eta = 1e-3;
  double epsilon = 0.0;
  double safety = 1.0;
  int max_outer = 200;
  std::optional<double> rho1_hint;
};

void run_generate(const Options& opt) {
  const sicca::Model model =
      sicca::build_model(sicca::parse_model_spec(opt.model_path));
  const sicca::Dataset data = sicca::sample_dataset(model, opt.n, opt.seed);
  sicca::write_csv(data, opt.out_path);
  std::cout << "wrote " << data.size() << " samples to " << opt.out_path
            << "\n";
}

void run_solve_erm(const Options& opt) {
  const sicca::Dataset data = sicca::read_csv(opt.data_path);
  const sicca::CcaSolution sol =
      sicca::solve_erm_exact(sicca::empirical_covariances(data));
  write_solution_json(sol, sol.correlation_estimate.value(), opt.out_path);
}

void run_solve_offline(const Options& opt) {
  const sicca::Dataset data = sicca::read_csv(opt.data_path);
  sicca::OfflineParams params;
  params.eta = opt.eta;
  params.max_outer = opt.max_outer;
  if (opt.lambda != "auto") {
    try {
      params.lambda_override = std::stod(opt.lambda);
    } catch (const std::exception&) {
      throw sicca::ConfigError("lambda must be 'auto' or a number");
    }
  }
  sicca::OfflineTrace trace;
  const sicca::CcaSolution sol =
      sicca::offline_si_cca(data, params, opt.seed, &trace);
  std::cout << "outer iterations: " << trace.outer_iters << "\n";
  write_solution_json(sol, sol.correlation_estimate.value(), opt.out_path);
}

void run_solve_streaming(const Options& opt) {
  if (opt.model_path.empty() == opt.data_path.empty()) {
    throw sicca::ConfigError(
        "solve-streaming needs exactly one of --model or --data");
  }
  std::unique_ptr<sicca::SampleStream> stream;
  double lambda;
  if (!opt.model_path.empty()) {
    const sicca::Model model =
        sicca::build_model(sicca::parse_model_spec(opt.model_path));
    lambda = lambda_from_model(opt.lambda, model);
    stream = std::make_unique<sicca::ModelStream>(
        model, sicca::Rng::derive(opt.seed, kTagStream));
  } else {
    if (opt.lambda == "auto") {
      throw sicca::ConfigError(
          "lambda 'auto' needs a synthetic model; give a numeric --lambda");
    }
    lambda = parse_lambda_number(opt.lambda);
    stream = sicca::open_csv_stream(opt.data_path);
  }
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) {
    throw sicca::ConfigError("--epsilon must lie in (0, 1)");
  }

  sicca::StreamingParams params;
  params.epsilon = opt.epsilon;
  params.lambda = lambda;
  params.pilot_count = opt.pilot;
  params.safety = opt.safety;
  params.max_outer = opt.max_outer;
  params.rho1_hint = opt.rho1_hint;
  if (opt.tail == "bounded") {
    params.tail = sicca::TailClass::Bounded;
  } else if (opt.tail != "subgaussian") {
    throw sicca::ConfigError("--tail must be subgaussian or bounded");
  }

  const sicca::StreamingReport report =
      sicca::streaming_si_cca(*stream, params, opt.seed);
  std::cout << "samples used: " << report.samples_used << "\n";
  std::cout << "outer systems: " << report.outer_iters << "\n";
  write_solution_json(report.solution, report.rho1_est, opt.out_path);
}

void run_sweep(const Options& opt) {
  const sicca::ExperimentConfig cfg =
      sicca::parse_experiment_config(opt.config_path);
  if (cfg.output_path.empty()) {
    throw sicca::ConfigError("sweep config needs an [output] path");
  }
  const std::vector<sicca::ResultRow> rows = sicca::run_experiment(cfg);
  std::cout << "wrote " << rows.size() << " rows to " << cfg.output_path
            << "\n";
}

void run_fit(const Options& opt) {
  const std::vector<sicca::ResultRow> rows =
      sicca::read_rows_csv(opt.data_path);
  const sicca::FitResult fit =
      sicca::fit_scaling_rows(rows, opt.x_field, opt.y_field);
  std::cout << "slope = " << sicca::format_double(fit.slope) << "\n";
  std::cout << "intercept = " << sicca::format_double(fit.intercept) << "\n";
  std::cout << "r2 = " << sicca::format_double(fit.r2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canonical correlation analysis via shift-and-invert solvers"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* generate = app.add_subcommand(
      "generate", "draw a dataset from a model description");
  generate->add_option("--model", opt.model_path, "model description file")
      ->required();
  generate->add_option("--n", opt.n, "number of samples")->required();
  generate->add_option("--seed", opt.seed, "draw seed")->required();
  generate->add_option("--out", opt.out_path, "output CSV path")->required();

  CLI::App* solve_erm = app.add_subcommand(
      "solve-erm", "exact empirical solution of a dataset");
  solve_erm->add_option("--data", opt.data_path, "input CSV")->required();
  solve_erm->add_option("--out", opt.out_path,
                        "solution JSON path (stdout when omitted)");

  CLI::App* solve_offline = app.add_subcommand(
      "solve-offline", "shift-and-invert solve with variance-reduced inner steps");
  solve_offline->add_option("--data", opt.data_path, "input CSV")->required();
  solve_offline->add_option("--seed", opt.seed, "solver seed")->required();
  solve_offline->add_option("--eta", opt.eta, "alignment accuracy target");
  solve_offline->add_option("--lambda", opt.lambda,
                            "shift value, or 'auto' to locate one");
  solve_offline->add_option("--max-outer", opt.max_outer,
                            "outer iteration cap");
  solve_offline->add_option("--out", opt.out_path,
                            "solution JSON path (stdout when omitted)");

  CLI::App* solve_streaming = app.add_subcommand(
      "solve-streaming", "one-pass solve from a sample stream");
  solve_streaming->add_option("--model", opt.model_path,
                              "model file backing an unbounded stream");
  solve_streaming->add_option("--data", opt.data_path,
                              "CSV replayed once as the stream");
  solve_streaming->add_option("--seed", opt.seed, "stream and solver seed")
      ->required();
  solve_streaming->add_option("--epsilon", opt.epsilon, "accuracy target")
      ->required();
  solve_streaming->add_option("--lambda", opt.lambda,
                              "shift value; 'auto' allowed with --model");
  solve_streaming->add_option("--pilot", opt.pilot,
                              "pilot sample count (0 picks a default)");
  solve_streaming->add_option("--safety", opt.safety,
                              "schedule safety multiplier");
  solve_streaming->add_option("--max-outer", opt.max_outer,
                              "outer system cap");
  solve_streaming->add_option("--tail", opt.tail,
                              "noise class: subgaussian or bounded");
  solve_streaming->add_option("--rho1-hint", opt.rho1_hint,
                              "skip the pilot correlation estimate");
  solve_streaming->add_option("--out", opt.out_path,
                              "solution JSON path (stdout when omitted)");

  CLI::App* sweep =
      app.add_subcommand("sweep", "run an experiment grid from a config file");
  sweep->add_option("--config", opt.config_path, "experiment config file")
      ->required();

  CLI::App* fit = app.add_subcommand(
      "fit", "log-log scaling fit over sweep output rows");
  fit->add_option("--in", opt.data_path, "rows CSV from sweep")->required();
  fit->add_option("--x", opt.x_field, "x field: N, d or delta")->required();
  fit->add_option("--y", opt.y_field,
                  "y field: err, align_pop, align_erm or corr_ratio")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      run_generate(opt);
    } else if (solve_erm->parsed()) {
      run_solve_erm(opt);
    } else if (solve_offline->parsed()) {
      run_solve_offline(opt);
    } else if (solve_streaming->parsed()) {
      run_solve_streaming(opt);
    } else if (sweep->parsed()) {
      run_sweep(opt);
    } else if (fit->parsed()) {
      run_fit(opt);
    }
  } catch (const sicca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sicca::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const sicca::InvalidModel& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sicca::InsufficientSamples& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sicca::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sicca::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
