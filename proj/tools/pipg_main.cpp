#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pipg/errors.hpp"
#include "pipg/experiment.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string data_path;
  std::string truth_path;
  std::string out_dir;
  std::uint64_t seed = 0;
};

void add_common_options(CLI::App* sub, CliOptions& options) {
  sub->add_option("--config", options.config_path, "JSON experiment config")->required();
  sub->add_option("--seed", options.seed, "master seed, overrides the config");
  sub->add_option("--out", options.out_dir, "output directory, overrides the config");
}

int run_command(const CLI::App* sub, const CliOptions& options) {
  pipg::experiment::ExperimentConfig config =
      pipg::experiment::load_config(options.config_path);
  pipg::experiment::RunOverrides overrides;
  if (sub->count("--seed") > 0) {
    overrides.seed = options.seed;
  }
  if (sub->count("--out") > 0) {
    overrides.out_dir = options.out_dir;
  }

  pipg::experiment::RunResult result;
  if (sub->get_name() == "run") {
    result = pipg::experiment::run_experiment(std::move(config), overrides);
  } else if (sub->get_name() == "replay") {
    std::optional<std::filesystem::path> truth;
    if (sub->count("--truth") > 0) {
      truth = options.truth_path;
    }
    result = pipg::experiment::replay_experiment(options.data_path, truth, std::move(config),
                                                 overrides);
  } else {
    result = pipg::experiment::export_problem(std::move(config), overrides);
  }

  for (const auto& note : result.notes) {
    std::cerr << "note: " << note << "\n";
  }
  std::cout << "wrote " << result.files.size() << " files to " << result.out_dir.string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental proximal gradient experiment runner"};
  app.require_subcommand(1);
  CliOptions options;

  CLI::App* run = app.add_subcommand("run", "generate a dataset and run the solvers");
  add_common_options(run, options);

  CLI::App* replay = app.add_subcommand("replay", "run the solvers on an imported dataset");
  add_common_options(replay, options);
  replay->add_option("--data", options.data_path, "dataset CSV (header y,x_1,...,x_d)")
      ->required();
  replay->add_option("--truth", options.truth_path,
                     "ground-truth CSV; defaults to theta_star.csv next to the dataset");

  CLI::App* export_cmd =
      app.add_subcommand("export", "write the generated dataset and ground truth as CSV");
  add_common_options(export_cmd, options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // any command-line problem is a config error
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    return run_command(sub, options);
  } catch (const pipg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pipg::InvalidArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pipg::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const pipg::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
