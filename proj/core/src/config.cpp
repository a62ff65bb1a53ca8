#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sicca/errors.hpp"
#include "sicca/experiment.hpp"

namespace sicca {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(trim(value.substr(start)));
      break;
    }
    parts.push_back(trim(value.substr(start, comma - start)));
    start = comma + 1;
  }
  return parts;
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  const auto range = value.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = std::stoull(trim(value.substr(0, range)));
    const std::uint64_t hi = std::stoull(trim(value.substr(range + 2)));
    if (hi < lo) throw std::invalid_argument("descending seed range");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (const std::string& part : split_list(value)) {
    seeds.push_back(std::stoull(part));
  }
  return seeds;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("expected true or false");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  ExperimentConfig cfg;
  std::string section;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::string at = path + ":" + std::to_string(lineno) + ": ";
    if (stripped.front() == '[' && stripped.back() == ']') {
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "model" && section != "solver" && section != "sweep" &&
          section != "output") {
        throw ConfigError(at + "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(at + "expected key = value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const std::string qualified = section + "." + key;
    if (seen[qualified]) {
      throw ConfigError(at + "duplicate key '" + qualified + "'");
    }
    seen[qualified] = true;
    try {
      if (section == "model") {
        if (key == "class") {
          cfg.model.model_class = value;
        } else if (key == "d_x") {
          cfg.model.d_x = std::stoi(value);
        } else if (key == "d_y") {
          cfg.model.d_y = std::stoi(value);
        } else if (key == "delta") {
          cfg.model.delta = std::stod(value);
        } else if (key == "seed") {
          cfg.model.structure_seed = std::stoull(value);
        } else if (key == "direction") {
          cfg.model.direction = value;
        } else {
          throw ConfigError(at + "unknown key '" + qualified + "'");
        }
      } else if (section == "solver") {
        if (key == "name") {
          cfg.solver = value;
        } else if (key == "eta") {
          cfg.eta = std::stod(value);
        } else if (key == "lambda") {
          cfg.lambda = value;
        } else if (key == "safety") {
          cfg.safety = std::stod(value);
        } else if (key == "pilot") {
          cfg.pilot_count = std::stoll(value);
        } else if (key == "max_outer") {
          cfg.max_outer = std::stoi(value);
        } else {
          throw ConfigError(at + "unknown key '" + qualified + "'");
        }
      } else if (section == "sweep") {
        if (key == "n") {
          for (const std::string& p : split_list(value)) {
            cfg.n_grid.push_back(std::stoll(p));
          }
        } else if (key == "epsilon") {
          for (const std::string& p : split_list(value)) {
            cfg.epsilon_grid.push_back(std::stod(p));
          }
        } else if (key == "d") {
          for (const std::string& p : split_list(value)) {
            cfg.d_grid.push_back(std::stoi(p));
          }
        } else if (key == "delta") {
          for (const std::string& p : split_list(value)) {
            cfg.delta_grid.push_back(std::stod(p));
          }
        } else if (key == "seeds") {
          cfg.seeds = parse_seeds(value);
        } else {
          throw ConfigError(at + "unknown key '" + qualified + "'");
        }
      } else if (section == "output") {
        if (key == "path") {
          cfg.output_path = value;
        } else if (key == "timing") {
          cfg.timing = parse_bool(value);
        } else {
          throw ConfigError(at + "unknown key '" + qualified + "'");
        }
      } else {
        throw ConfigError(at + "key '" + key + "' outside any section");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(at + "cannot parse value '" + value + "' for key '" +
                        qualified + "'");
    }
  }

  if (!seen["model.class"] || !seen["model.d_x"] || !seen["model.d_y"] ||
      !seen["model.delta"]) {
    throw ConfigError(path + ": [model] needs class, d_x, d_y and delta");
  }
  if (cfg.solver != "erm" && cfg.solver != "offline-si" &&
      cfg.solver != "streaming-si") {
    throw ConfigError(path + ": unknown solver '" + cfg.solver + "'");
  }
  if (cfg.seeds.empty()) {
    throw ConfigError(path + ": [sweep] seeds must be nonempty");
  }
  const std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
  if (unique.size() != cfg.seeds.size()) {
    throw ConfigError(path + ": [sweep] seeds must be distinct");
  }
  if (cfg.solver == "streaming-si") {
    if (cfg.epsilon_grid.empty()) {
      throw ConfigError(path + ": streaming-si sweeps need an epsilon grid");
    }
    for (double eps : cfg.epsilon_grid) {
      if (!(eps > 0.0 && eps < 1.0)) {
        throw ConfigError(path + ": epsilon values must lie in (0, 1)");
      }
    }
  } else {
    if (cfg.n_grid.empty()) {
      throw ConfigError(path + ": batch sweeps need an n grid");
    }
    for (std::int64_t n : cfg.n_grid) {
      if (n < 2) throw ConfigError(path + ": n values must be at least 2");
    }
  }
  for (int d : cfg.d_grid) {
    if (d < 1) throw ConfigError(path + ": d values must be positive");
  }
  return cfg;
}

}  // namespace sicca
