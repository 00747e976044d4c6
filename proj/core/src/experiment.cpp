#include "pipg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>
#include <utility>

#include "json.hpp"

#include "pipg/csv.hpp"
#include "pipg/errors.hpp"
#include "pipg/models.hpp"
#include "pipg/rng.hpp"

namespace pipg::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Small naming helpers shared by parsing and the manifest.

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ridge: return "ridge";
    case ExperimentKind::sparse_nonlinear: return "sparse_nonlinear";
    case ExperimentKind::custom: return "custom";
  }
  return "custom";
}

const char* generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::none: return "none";
    case GeneratorKind::ridge: return "ridge";
    case GeneratorKind::sparse_nonlinear: return "sparse_nonlinear";
  }
  return "none";
}

const char* observation_name(ObservationKind kind) {
  return kind == ObservationKind::sigmoid ? "sigmoid" : "linear";
}

const char* regularizer_name(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::ridge: return "ridge";
    case RegularizerKind::smoothed_l2l1: return "smoothed_l2l1";
  }
  return "none";
}

const char* schedule_name(solvers::ScheduleConfig::Kind kind) {
  switch (kind) {
    case solvers::ScheduleConfig::Kind::constant: return "constant";
    case solvers::ScheduleConfig::Kind::polynomial_decay: return "polynomial_decay";
    case solvers::ScheduleConfig::Kind::rational_decay: return "rational_decay";
  }
  return "constant";
}

std::string format_gamma(double gamma) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", gamma);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON extraction helpers. Every failure names the offending field.

[[noreturn]] void fail_field(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void check_keys(const json& object, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail_field(path, "unknown key \"" + item.key() + "\"");
    }
  }
}

const json& require_object(const json& value, const std::string& path) {
  if (!value.is_object()) {
    fail_field(path, "expected an object");
  }
  return value;
}

std::string require_string(const json& value, const std::string& path) {
  if (!value.is_string()) {
    fail_field(path, "expected a string");
  }
  return value.get<std::string>();
}

bool require_bool(const json& value, const std::string& path) {
  if (!value.is_boolean()) {
    fail_field(path, "expected true or false");
  }
  return value.get<bool>();
}

double require_number(const json& value, const std::string& path) {
  if (!value.is_number()) {
    fail_field(path, "expected a number");
  }
  return value.get<double>();
}

double require_positive(const json& value, const std::string& path) {
  const double v = require_number(value, path);
  if (!(v > 0.0)) {
    fail_field(path, "expected a positive number");
  }
  return v;
}

double require_nonnegative(const json& value, const std::string& path) {
  const double v = require_number(value, path);
  if (!(v >= 0.0)) {
    fail_field(path, "expected a nonnegative number");
  }
  return v;
}

std::int64_t require_positive_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) {
    fail_field(path, "expected an integer");
  }
  const std::int64_t v = value.get<std::int64_t>();
  if (v < 1) {
    fail_field(path, "expected a positive integer");
  }
  return v;
}

std::int64_t require_nonnegative_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) {
    fail_field(path, "expected an integer");
  }
  const std::int64_t v = value.get<std::int64_t>();
  if (v < 0) {
    fail_field(path, "expected a nonnegative integer");
  }
  return v;
}

std::uint64_t require_u64(const json& value, const std::string& path) {
  if (value.is_number_unsigned()) {
    return value.get<std::uint64_t>();
  }
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  fail_field(path, "expected a nonnegative integer");
}

int line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t end = byte > 0 ? byte - 1 : 0;  // parse positions are 1-based
  end = std::min(end, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + end, '\n'));
}

std::vector<double> linspace(double lo, double hi, std::int64_t count) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    values.push_back(lo);
    return values;
  }
  for (std::int64_t i = 0; i < count; ++i) {
    values.push_back(lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(count - 1));
  }
  return values;
}

// ---------------------------------------------------------------------------
// Built-in experiment presets. Explicit config keys override these.

SolverEntry default_pipg() {
  SolverEntry entry;
  entry.name = "pipg";
  return entry;
}

SolverEntry default_ipg() {
  SolverEntry entry;
  entry.name = "ipg";
  entry.schedule.kind = solvers::ScheduleConfig::Kind::polynomial_decay;
  entry.schedule.decay_exponent = 0.51;
  return entry;
}

SolverEntry default_sgd() {
  SolverEntry entry;
  entry.name = "sgd";
  entry.schedule.kind = solvers::ScheduleConfig::Kind::rational_decay;
  entry.schedule.alpha1 = 1e-4;
  return entry;
}

void apply_kind_defaults(ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::ridge: {
      config.generator_kind = GeneratorKind::ridge;
      config.ridge_gen.dimension = 20;
      config.ridge_gen.count = 5000;
      config.ridge_gen.noise_variance = 1.0;
      config.observation = ObservationKind::linear;
      config.regularizer = {RegularizerKind::ridge, 1e-2, 0.1};
      config.gamma_grid = linspace(0.005, 0.2, 40);
      SolverEntry pipg = default_pipg();
      pipg.solver.v0_scale = 100.0;
      pipg.solver.shuffle = true;
      config.solver_entries = {pipg, default_ipg()};
      break;
    }
    case ExperimentKind::sparse_nonlinear: {
      config.generator_kind = GeneratorKind::sparse_nonlinear;
      config.ar_gen.dimension = 10;
      config.ar_gen.count = 20000;
      config.ar_gen.ar_coefficient = 0.8;
      config.ar_gen.noise_precision = 1.0;
      config.ar_gen.sparsity = 0;  // generator picks max(1, d/10)
      config.observation = ObservationKind::sigmoid;
      config.regularizer = {RegularizerKind::smoothed_l2l1, 1e-5, 0.1};
      config.gamma_grid = {1.0};
      SolverEntry pipg = default_pipg();
      pipg.solver.v0_scale = 100.0;
      pipg.solver.process_noise_scale = 1e-4;
      config.solver_entries = {pipg, default_sgd()};
      break;
    }
    case ExperimentKind::custom: {
      config.generator_kind = GeneratorKind::none;
      config.observation = ObservationKind::linear;
      config.regularizer = {RegularizerKind::none, 0.0, 0.1};
      config.gamma_grid = {1.0};
      config.solver_entries = {default_pipg()};
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Section parsers.

void parse_generator(const json& section, ExperimentConfig& config) {
  require_object(section, "generator");
  check_keys(section, "generator",
             {"kind", "dimension", "count", "noise_variance", "ar_coefficient",
              "noise_precision", "sparsity"});
  if (section.contains("kind")) {
    const std::string kind = require_string(section["kind"], "generator.kind");
    if (kind == "ridge") {
      config.generator_kind = GeneratorKind::ridge;
    } else if (kind == "sparse_nonlinear") {
      config.generator_kind = GeneratorKind::sparse_nonlinear;
    } else if (kind == "none") {
      config.generator_kind = GeneratorKind::none;
    } else {
      fail_field("generator.kind", "expected \"ridge\", \"sparse_nonlinear\", or \"none\"");
    }
  }
  const bool is_ridge = config.generator_kind == GeneratorKind::ridge;
  const bool is_ar = config.generator_kind == GeneratorKind::sparse_nonlinear;
  if (section.contains("dimension")) {
    const auto d = require_positive_int(section["dimension"], "generator.dimension");
    config.ridge_gen.dimension = d;
    config.ar_gen.dimension = d;
  }
  if (section.contains("count")) {
    const auto n = require_positive_int(section["count"], "generator.count");
    config.ridge_gen.count = n;
    config.ar_gen.count = n;
  }
  if (section.contains("noise_variance")) {
    if (!is_ridge) {
      fail_field("generator.noise_variance", "only valid for the ridge generator");
    }
    config.ridge_gen.noise_variance =
        require_positive(section["noise_variance"], "generator.noise_variance");
  }
  if (section.contains("ar_coefficient")) {
    if (!is_ar) {
      fail_field("generator.ar_coefficient", "only valid for the sparse_nonlinear generator");
    }
    const double a = require_number(section["ar_coefficient"], "generator.ar_coefficient");
    if (!(std::abs(a) < 1.0)) {
      fail_field("generator.ar_coefficient", "expected |a| < 1");
    }
    config.ar_gen.ar_coefficient = a;
  }
  if (section.contains("noise_precision")) {
    if (!is_ar) {
      fail_field("generator.noise_precision", "only valid for the sparse_nonlinear generator");
    }
    config.ar_gen.noise_precision =
        require_positive(section["noise_precision"], "generator.noise_precision");
  }
  if (section.contains("sparsity")) {
    if (!is_ar) {
      fail_field("generator.sparsity", "only valid for the sparse_nonlinear generator");
    }
    config.ar_gen.sparsity = require_nonnegative_int(section["sparsity"], "generator.sparsity");
  }
}

void parse_regularizer(const json& section, ExperimentConfig& config) {
  require_object(section, "regularizer");
  check_keys(section, "regularizer", {"kind", "lambda", "delta"});
  if (section.contains("kind")) {
    const std::string kind = require_string(section["kind"], "regularizer.kind");
    if (kind == "none") {
      config.regularizer.kind = RegularizerKind::none;
    } else if (kind == "ridge") {
      config.regularizer.kind = RegularizerKind::ridge;
    } else if (kind == "smoothed_l2l1") {
      config.regularizer.kind = RegularizerKind::smoothed_l2l1;
    } else {
      fail_field("regularizer.kind", "expected \"none\", \"ridge\", or \"smoothed_l2l1\"");
    }
  }
  if (section.contains("lambda")) {
    config.regularizer.lambda = require_nonnegative(section["lambda"], "regularizer.lambda");
  }
  if (section.contains("delta")) {
    config.regularizer.delta = require_positive(section["delta"], "regularizer.delta");
  }
  if (config.regularizer.kind == RegularizerKind::smoothed_l2l1 &&
      !(config.regularizer.lambda > 0.0)) {
    fail_field("regularizer.lambda", "smoothed_l2l1 requires a positive strength");
  }
}

void parse_gamma_grid(const json& section, ExperimentConfig& config) {
  std::vector<double> grid;
  if (section.is_array()) {
    if (section.empty()) {
      fail_field("gamma_grid", "expected at least one value");
    }
    for (std::size_t i = 0; i < section.size(); ++i) {
      grid.push_back(
          require_positive(section[i], "gamma_grid[" + std::to_string(i) + "]"));
    }
  } else if (section.is_object()) {
    check_keys(section, "gamma_grid", {"min", "max", "count"});
    if (!section.contains("min") || !section.contains("max") || !section.contains("count")) {
      fail_field("gamma_grid", "expected min, max, and count");
    }
    const double lo = require_positive(section["min"], "gamma_grid.min");
    const double hi = require_positive(section["max"], "gamma_grid.max");
    const auto count = require_positive_int(section["count"], "gamma_grid.count");
    if (hi < lo) {
      fail_field("gamma_grid.max", "expected max >= min");
    }
    if (count > 1 && hi == lo) {
      fail_field("gamma_grid.count", "expected count 1 when min == max");
    }
    grid = linspace(lo, hi, count);
  } else {
    fail_field("gamma_grid", "expected an array of values or {min, max, count}");
  }
  config.gamma_grid = std::move(grid);
}

solvers::ScheduleConfig parse_schedule(const json& section, const std::string& path,
                                       solvers::ScheduleConfig defaults) {
  require_object(section, path);
  check_keys(section, path, {"kind", "decay_exponent", "alpha1"});
  if (section.contains("kind")) {
    const std::string kind = require_string(section["kind"], path + ".kind");
    if (kind == "constant") {
      defaults.kind = solvers::ScheduleConfig::Kind::constant;
    } else if (kind == "polynomial_decay") {
      defaults.kind = solvers::ScheduleConfig::Kind::polynomial_decay;
    } else if (kind == "rational_decay") {
      defaults.kind = solvers::ScheduleConfig::Kind::rational_decay;
    } else {
      fail_field(path + ".kind",
                 "expected \"constant\", \"polynomial_decay\", or \"rational_decay\"");
    }
  }
  if (section.contains("decay_exponent")) {
    defaults.decay_exponent = require_positive(section["decay_exponent"], path + ".decay_exponent");
  }
  if (section.contains("alpha1")) {
    defaults.alpha1 = require_nonnegative(section["alpha1"], path + ".alpha1");
  }
  return defaults;
}

SolverEntry parse_solver(const json& section, std::size_t index) {
  const std::string path = "solvers[" + std::to_string(index) + "]";
  require_object(section, path);
  if (!section.contains("name")) {
    fail_field(path, "missing solver name");
  }
  const std::string name = require_string(section["name"], path + ".name");
  SolverEntry entry;
  if (name == "pipg") {
    entry = default_pipg();
    check_keys(section, path,
               {"name", "v0_scale", "process_noise", "passes", "shuffle", "rmse_stride",
                "cov_stride"});
    if (section.contains("v0_scale")) {
      entry.solver.v0_scale = require_positive(section["v0_scale"], path + ".v0_scale");
    }
    if (section.contains("process_noise")) {
      entry.solver.process_noise_scale =
          require_nonnegative(section["process_noise"], path + ".process_noise");
    }
    if (section.contains("passes")) {
      entry.solver.passes =
          static_cast<int>(require_positive_int(section["passes"], path + ".passes"));
    }
    if (section.contains("cov_stride")) {
      entry.solver.cov_stride =
          require_nonnegative_int(section["cov_stride"], path + ".cov_stride");
    }
  } else if (name == "ipg" || name == "sgd") {
    entry = name == "ipg" ? default_ipg() : default_sgd();
    check_keys(section, path, {"name", "schedule", "shuffle", "rmse_stride"});
    if (section.contains("schedule")) {
      entry.schedule = parse_schedule(section["schedule"], path + ".schedule", entry.schedule);
    }
  } else {
    fail_field(path + ".name", "expected \"pipg\", \"ipg\", or \"sgd\"");
  }
  if (section.contains("shuffle")) {
    entry.solver.shuffle = require_bool(section["shuffle"], path + ".shuffle");
  }
  if (section.contains("rmse_stride")) {
    entry.solver.rmse_stride =
        require_positive_int(section["rmse_stride"], path + ".rmse_stride");
  }
  return entry;
}

void validate_config(const ExperimentConfig& config) {
  if (config.solver_entries.empty()) {
    throw ConfigError("solvers: at least one solver must be selected");
  }
  std::set<std::string> names;
  for (const auto& entry : config.solver_entries) {
    if (!names.insert(entry.name).second) {
      throw ConfigError("solvers: duplicate solver \"" + entry.name + "\"");
    }
    if (entry.name == "ipg") {
      if (config.observation != ObservationKind::linear) {
        throw ConfigError("solvers: ipg requires a linear observation model");
      }
      if (config.regularizer.kind == RegularizerKind::smoothed_l2l1) {
        throw ConfigError("solvers: ipg requires a quadratic regularizer (ridge or none)");
      }
    }
  }
  std::set<std::string> stems;
  for (const auto& entry : config.solver_entries) {
    for (double gamma : config.gamma_grid) {
      if (!stems.insert(entry.name + "_" + format_gamma(gamma)).second) {
        throw ConfigError("gamma_grid: values " + format_gamma(gamma) +
                          " collide after formatting; thin the grid");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Execution.

std::unique_ptr<const models::Regularizer> make_regularizer(const RegularizerSpec& spec,
                                                            Eigen::Index dimension) {
  switch (spec.kind) {
    case RegularizerKind::none:
      return std::make_unique<models::ZeroRegularizer>();
    case RegularizerKind::ridge:
      return std::make_unique<models::QuadraticRegularizer>(
          models::QuadraticRegularizer::ridge(dimension, spec.lambda));
    case RegularizerKind::smoothed_l2l1:
      return std::make_unique<models::SmoothedL2L1Regularizer>(spec.lambda, spec.delta);
  }
  return std::make_unique<models::ZeroRegularizer>();
}

solvers::ObservationModelFactory make_factory(ObservationKind kind) {
  return kind == ObservationKind::sigmoid ? solvers::sigmoid_observation_factory()
                                          : solvers::linear_observation_factory();
}

template <typename Fn>
auto with_run_context(const std::string& name, double gamma, Fn&& fn) {
  const std::string where = "solver " + name + ", gamma " + format_gamma(gamma) + ": ";
  try {
    return fn();
  } catch (const NumericInputError& e) {
    throw NumericInputError(where + e.what());
  } catch (const InternalInvariantError& e) {
    throw InternalInvariantError(where + e.what());
  } catch (const IllConditionedError& e) {
    throw IllConditionedError(where + e.what());
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(where + e.what());
  }
}

std::vector<Eigen::Index> shuffled_order(Eigen::Index count, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto gen = rng::make_stream(seed, 1);  // stream 1 matches the first in-solver pass
  std::shuffle(order.begin(), order.end(), gen);
  return order;
}

void write_text_atomic(const fs::path& file, const std::string& text) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError(tmp.string() + ": cannot open for writing");
    }
    out << text;
    out.flush();
    if (!out) {
      throw IoError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(file.string() + ": rename failed");
  }
}

ordered_json generator_manifest(const ExperimentConfig& config) {
  ordered_json out;
  out["kind"] = generator_name(config.generator_kind);
  if (config.generator_kind == GeneratorKind::ridge) {
    out["dimension"] = config.ridge_gen.dimension;
    out["count"] = config.ridge_gen.count;
    out["noise_variance"] = config.ridge_gen.noise_variance;
  } else if (config.generator_kind == GeneratorKind::sparse_nonlinear) {
    out["dimension"] = config.ar_gen.dimension;
    out["count"] = config.ar_gen.count;
    out["ar_coefficient"] = config.ar_gen.ar_coefficient;
    out["noise_precision"] = config.ar_gen.noise_precision;
    out["sparsity"] = config.ar_gen.sparsity;
  }
  return out;
}

ordered_json regularizer_manifest(const RegularizerSpec& spec) {
  ordered_json out;
  out["kind"] = regularizer_name(spec.kind);
  if (spec.kind != RegularizerKind::none) {
    out["lambda"] = spec.lambda;
  }
  if (spec.kind == RegularizerKind::smoothed_l2l1) {
    out["delta"] = spec.delta;
  }
  return out;
}

ordered_json solver_manifest(const SolverEntry& entry) {
  ordered_json out;
  out["name"] = entry.name;
  out["shuffle"] = entry.solver.shuffle;
  out["rmse_stride"] = entry.solver.rmse_stride;
  if (entry.name == "pipg") {
    out["v0_scale"] = entry.solver.v0_scale;
    out["process_noise"] = entry.solver.process_noise_scale;
    out["passes"] = entry.solver.passes;
    out["cov_stride"] = entry.solver.cov_stride;
  } else {
    ordered_json schedule;
    schedule["kind"] = schedule_name(entry.schedule.kind);
    if (entry.schedule.kind == solvers::ScheduleConfig::Kind::polynomial_decay) {
      schedule["decay_exponent"] = entry.schedule.decay_exponent;
    }
    if (entry.schedule.kind == solvers::ScheduleConfig::Kind::rational_decay) {
      schedule["alpha1"] = entry.schedule.alpha1;
    }
    out["schedule"] = schedule;
  }
  return out;
}

ordered_json threshold_manifest(ExperimentKind kind) {
  ordered_json out;
  if (kind == ExperimentKind::ridge) {
    out["pipg_final_error_factor"] = 1.5;  // vs the batch ridge oracle
  } else if (kind == ExperimentKind::sparse_nonlinear) {
    out["stability_band"] = {0.9, 1.1};  // of each solver's own final error
    out["cov_last_decile_range_fraction"] = 0.1;
  }
  return out;
}

// Runs every (solver, gamma) pair on one dataset and writes all output files.
RunResult execute_runs(const ExperimentConfig& config, const Dataset& data,
                       const std::optional<Eigen::VectorXd>& truth, const fs::path& out_dir,
                       ordered_json manifest, std::vector<std::string> notes) {
  if (config.gamma_grid.empty()) {
    throw ConfigError("gamma_grid: expected at least one value");
  }
  RunResult result;
  result.out_dir = out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError(out_dir.string() + ": cannot create output directory");
  }

  const auto factory = make_factory(config.observation);
  const auto regularizer = make_regularizer(config.regularizer, data.dimension());
  const models::QuadraticRegularizer ipg_regularizer =
      config.regularizer.kind == RegularizerKind::ridge
          ? models::QuadraticRegularizer::ridge(data.dimension(), config.regularizer.lambda)
          : models::QuadraticRegularizer::ridge(data.dimension(), 0.0);
  if (!truth.has_value()) {
    notes.push_back("no ground truth supplied; traces omit the rmse column");
  }
  notes.push_back("posterior and covariance files reflect the last gamma_grid value");

  ordered_json solver_list = ordered_json::array();
  for (const auto& entry : config.solver_entries) {
    ordered_json solver_json = solver_manifest(entry);
    ordered_json runs = ordered_json::array();
    solvers::Trace last_trace;
    for (std::size_t gi = 0; gi < config.gamma_grid.size(); ++gi) {
      const double gamma = config.gamma_grid[gi];
      const std::uint64_t run_seed =
          rng::mix_seed(rng::mix_seed(config.seed, rng::hash_name(entry.name)), gi);
      solvers::Trace trace = with_run_context(entry.name, gamma, [&] {
        if (entry.name == "pipg") {
          solvers::SolverConfig run_config = entry.solver;
          run_config.gamma = gamma;
          run_config.seed = run_seed;
          return solvers::run_pipg(data, factory, *regularizer, run_config, truth);
        }
        const Dataset* run_data = &data;
        Dataset permuted;
        if (entry.solver.shuffle) {
          permuted = data.permuted(shuffled_order(data.count(), run_seed));
          run_data = &permuted;
        }
        solvers::ScheduleConfig schedule = entry.schedule;
        schedule.base = gamma;
        schedule.alpha0 = gamma;
        if (entry.name == "ipg") {
          return solvers::run_ipg(*run_data, ipg_regularizer, schedule, truth,
                                  entry.solver.rmse_stride);
        }
        return solvers::run_sgd(*run_data, factory, *regularizer, schedule, truth,
                                entry.solver.rmse_stride);
      });

      const std::string trace_name =
          "trace_" + entry.name + "_" + format_gamma(gamma) + ".csv";
      csv::write_trace(out_dir / trace_name, trace);
      result.files.push_back(out_dir / trace_name);

      ordered_json run_json;
      run_json["gamma"] = gamma;
      run_json["gamma_index"] = gi;
      run_json["seed"] = run_seed;
      run_json["trace"] = trace_name;
      if (trace.has_rmse && !trace.records.empty()) {
        run_json["final_rmse"] = trace.records.back().rmse;
      }
      runs.push_back(std::move(run_json));
      if (gi + 1 == config.gamma_grid.size()) {
        last_trace = std::move(trace);
      }
    }
    solver_json["runs"] = std::move(runs);

    const std::string posterior_name = "posterior_" + entry.name + ".csv";
    csv::write_posterior(out_dir / posterior_name, last_trace.final_state);
    result.files.push_back(out_dir / posterior_name);
    solver_json["posterior"] = posterior_name;
    if (!last_trace.cov_diagonals.empty()) {
      const std::string cov_name = "cov_diag_" + entry.name + ".csv";
      csv::write_cov_diagonals(out_dir / cov_name, last_trace.cov_diagonals);
      result.files.push_back(out_dir / cov_name);
      solver_json["covariance_diagonals"] = cov_name;
    }
    solver_list.push_back(std::move(solver_json));
  }

  manifest["observation"] = observation_name(config.observation);
  manifest["regularizer"] = regularizer_manifest(config.regularizer);
  manifest["gamma_grid"] = config.gamma_grid;
  manifest["solvers"] = std::move(solver_list);
  const ordered_json thresholds = threshold_manifest(config.kind);
  if (!thresholds.empty()) {
    manifest["thresholds"] = thresholds;
  }
  manifest["notes"] = notes;

  const fs::path manifest_file = out_dir / "manifest.json";
  write_text_atomic(manifest_file, manifest.dump(2) + "\n");
  result.files.push_back(manifest_file);
  result.notes = std::move(notes);
  return result;
}

fs::path resolve_out_dir(const ExperimentConfig& config, const RunOverrides& overrides) {
  std::string dir = overrides.out_dir.value_or(config.out_dir);
  if (dir.empty()) {
    throw ConfigError("out_dir: no output directory (set out_dir in the config or pass --out)");
  }
  return fs::path(dir);
}

void apply_overrides(ExperimentConfig& config, const RunOverrides& overrides) {
  if (overrides.seed.has_value()) {
    config.seed = *overrides.seed;
  }
}

datagen::GeneratedProblem generate_problem(const ExperimentConfig& config) {
  if (config.generator_kind == GeneratorKind::ridge) {
    datagen::RidgeGenConfig gen = config.ridge_gen;
    gen.seed = config.seed;
    return datagen::generate_ridge(gen);
  }
  if (config.generator_kind == GeneratorKind::sparse_nonlinear) {
    datagen::ARGenConfig gen = config.ar_gen;
    gen.seed = config.seed;
    return datagen::generate_sparse_nonlinear(gen);
  }
  throw ConfigError("generator: this command needs a generator; set generator.kind");
}

ordered_json manifest_header(const ExperimentConfig& config, const char* command) {
  ordered_json manifest;
  manifest["command"] = command;
  manifest["experiment"] = kind_name(config.kind);
  manifest["seed"] = config.seed;
  return manifest;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of_byte(json_text, e.byte)) + ": " +
                      e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("top level: expected a JSON object");
  }
  check_keys(doc, "top level",
             {"experiment", "seed", "out_dir", "generator", "observation", "regularizer",
              "gamma_grid", "solvers"});

  ExperimentConfig config;
  if (doc.contains("experiment")) {
    const std::string kind = require_string(doc["experiment"], "experiment");
    if (kind == "ridge") {
      config.kind = ExperimentKind::ridge;
    } else if (kind == "sparse_nonlinear") {
      config.kind = ExperimentKind::sparse_nonlinear;
    } else if (kind == "custom") {
      config.kind = ExperimentKind::custom;
    } else {
      fail_field("experiment", "expected \"ridge\", \"sparse_nonlinear\", or \"custom\"");
    }
  }
  apply_kind_defaults(config);

  if (doc.contains("seed")) {
    config.seed = require_u64(doc["seed"], "seed");
  }
  if (doc.contains("out_dir")) {
    config.out_dir = require_string(doc["out_dir"], "out_dir");
  }
  if (doc.contains("generator")) {
    parse_generator(doc["generator"], config);
  }
  if (doc.contains("observation")) {
    const std::string kind = require_string(doc["observation"], "observation");
    if (kind == "linear") {
      config.observation = ObservationKind::linear;
    } else if (kind == "sigmoid") {
      config.observation = ObservationKind::sigmoid;
    } else {
      fail_field("observation", "expected \"linear\" or \"sigmoid\"");
    }
  }
  if (doc.contains("regularizer")) {
    parse_regularizer(doc["regularizer"], config);
  }
  if (doc.contains("gamma_grid")) {
    parse_gamma_grid(doc["gamma_grid"], config);
  }
  if (doc.contains("solvers")) {
    const json& solvers_json = doc["solvers"];
    if (!solvers_json.is_array()) {
      fail_field("solvers", "expected an array");
    }
    config.solver_entries.clear();
    for (std::size_t i = 0; i < solvers_json.size(); ++i) {
      config.solver_entries.push_back(parse_solver(solvers_json[i], i));
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw IoError(file.string() + ": cannot open config file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError(file.string() + ": read failed");
  }
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

RunResult run_experiment(ExperimentConfig config, const RunOverrides& overrides) {
  apply_overrides(config, overrides);
  const fs::path out_dir = resolve_out_dir(config, overrides);
  const datagen::GeneratedProblem problem = generate_problem(config);

  ordered_json manifest = manifest_header(config, "run");
  manifest["generator"] = generator_manifest(config);
  manifest["generator_echo"] = problem.metadata;
  return execute_runs(config, problem.dataset, problem.ground_truth, out_dir,
                      std::move(manifest), {});
}

RunResult replay_experiment(const std::filesystem::path& dataset_file,
                            const std::optional<std::filesystem::path>& truth_file,
                            ExperimentConfig config, const RunOverrides& overrides) {
  apply_overrides(config, overrides);
  const fs::path out_dir = resolve_out_dir(config, overrides);

  std::vector<std::string> notes;
  if (config.generator_kind != GeneratorKind::none) {
    notes.push_back("generator section ignored; replay uses the imported dataset");
  }
  const Dataset data = csv::read_dataset(dataset_file);

  std::optional<Eigen::VectorXd> truth;
  fs::path truth_path;
  if (truth_file.has_value()) {
    truth_path = *truth_file;
  } else {
    const fs::path sibling = dataset_file.parent_path() / "theta_star.csv";
    std::error_code ec;
    if (fs::exists(sibling, ec)) {
      truth_path = sibling;
    }
  }
  if (!truth_path.empty()) {
    Eigen::VectorXd loaded = csv::read_ground_truth(truth_path);
    if (loaded.size() != data.dimension()) {
      throw InvalidArgumentError("ground truth has length " + std::to_string(loaded.size()) +
                                 " but the dataset has dimension " +
                                 std::to_string(data.dimension()));
    }
    truth = std::move(loaded);
  }

  ordered_json manifest = manifest_header(config, "replay");
  manifest["dataset"] = dataset_file.filename().string();
  manifest["ground_truth"] =
      truth_path.empty() ? ordered_json(nullptr) : ordered_json(truth_path.filename().string());
  return execute_runs(config, data, truth, out_dir, std::move(manifest), std::move(notes));
}

RunResult export_problem(ExperimentConfig config, const RunOverrides& overrides) {
  apply_overrides(config, overrides);
  const fs::path out_dir = resolve_out_dir(config, overrides);
  const datagen::GeneratedProblem problem = generate_problem(config);

  RunResult result;
  result.out_dir = out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError(out_dir.string() + ": cannot create output directory");
  }
  csv::write_dataset(out_dir / "dataset.csv", problem.dataset);
  result.files.push_back(out_dir / "dataset.csv");
  csv::write_ground_truth(out_dir / "theta_star.csv", problem.ground_truth);
  result.files.push_back(out_dir / "theta_star.csv");

  ordered_json manifest = manifest_header(config, "export");
  manifest["generator"] = generator_manifest(config);
  manifest["generator_echo"] = problem.metadata;
  manifest["files"] = {"dataset.csv", "theta_star.csv"};
  const fs::path manifest_file = out_dir / "manifest.json";
  write_text_atomic(manifest_file, manifest.dump(2) + "\n");
  result.files.push_back(manifest_file);
  return result;
}

}  // namespace pipg::experiment
