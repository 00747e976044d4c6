#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pipg/datagen.hpp"
#include "pipg/solvers.hpp"

namespace pipg::experiment {

enum class ExperimentKind { ridge, sparse_nonlinear, custom };
enum class GeneratorKind { none, ridge, sparse_nonlinear };
enum class ObservationKind { linear, sigmoid };
enum class RegularizerKind { none, ridge, smoothed_l2l1 };

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;
  double delta = 0.1;  // smoothed l2-l1 only
};

struct SolverEntry {
  std::string name;                  // "pipg", "ipg", or "sgd"
  solvers::SolverConfig solver;      // pipg settings; shuffle/strides apply to all
  solvers::ScheduleConfig schedule;  // ipg/sgd step schedule
};

// A parsed and default-resolved experiment description. The JSON schema is
// documented in the README.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::custom;
  std::uint64_t seed = 0;
  std::string out_dir;  // may be empty; the CLI --out flag then becomes mandatory

  GeneratorKind generator_kind = GeneratorKind::none;
  datagen::RidgeGenConfig ridge_gen;
  datagen::ARGenConfig ar_gen;

  ObservationKind observation = ObservationKind::linear;
  RegularizerSpec regularizer;

  // Every solver runs once per grid value. Empty means one run per solver
  // with its own configured step parameter.
  std::vector<double> gamma_grid;

  std::vector<SolverEntry> solver_entries;
};

// Throws ConfigError with a line number on parse errors, or a field path on
// validation errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;
};

// Generates the dataset per the config, runs every (solver, grid value)
// combination, and writes trace/posterior/covariance CSVs plus manifest.json.
RunResult run_experiment(ExperimentConfig config, const RunOverrides& overrides = {});

// Same outputs, but on a dataset imported from CSV. The ground-truth sidecar
// is optional: without it traces carry no rmse column.
RunResult replay_experiment(const std::filesystem::path& dataset_file,
                            const std::optional<std::filesystem::path>& truth_file,
                            ExperimentConfig config, const RunOverrides& overrides = {});

// Writes dataset.csv and theta_star.csv for the config's generator.
RunResult export_problem(ExperimentConfig config, const RunOverrides& overrides = {});

}  // namespace pipg::experiment
