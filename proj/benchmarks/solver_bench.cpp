#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "pipg/datagen.hpp"
#include "pipg/kalman.hpp"
#include "pipg/models.hpp"
#include "pipg/solvers.hpp"

namespace {

using pipg::datagen::ARGenConfig;
using pipg::datagen::RidgeGenConfig;

pipg::kalman::PosteriorState make_state(Eigen::Index d) {
  pipg::kalman::PosteriorState state;
  state.mean = Eigen::VectorXd::Zero(d);
  state.cov = 100.0 * Eigen::MatrixXd::Identity(d, d);
  return state;
}

void bm_rank_one_update(benchmark::State& bench) {
  const Eigen::Index d = bench.range(0);
  auto state = make_state(d);
  pipg::kalman::MeasurementLinearization lin;
  lin.direction = Eigen::VectorXd::Constant(d, 0.1);
  lin.predicted_output = 0.0;
  lin.observed_output = 0.5;
  lin.noise_precision = 1.0;
  for (auto _ : bench) {
    auto next = pipg::kalman::rank_one_update(state, lin);
    benchmark::DoNotOptimize(next.mean.data());
  }
}

void bm_pipg_step_linear(benchmark::State& bench) {
  const Eigen::Index d = bench.range(0);
  const auto reg = pipg::models::QuadraticRegularizer::ridge(d, 1e-2);
  auto state = make_state(d);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.1);
  const pipg::Observation obs{0.5, x};
  for (auto _ : bench) {
    auto next = pipg::solvers::pipg_step_linear(state, obs, reg, 0.1);
    benchmark::DoNotOptimize(next.mean.data());
  }
}

void bm_pipg_step_general(benchmark::State& bench) {
  const Eigen::Index d = bench.range(0);
  const pipg::models::SmoothedL2L1Regularizer reg(1e-5, 0.1);
  auto state = make_state(d);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.1);
  const pipg::models::SigmoidObservation model(x);
  const Eigen::MatrixXd q = 1e-4 * Eigen::MatrixXd::Identity(d, d);
  for (auto _ : bench) {
    auto next = pipg::solvers::pipg_step_general(state, 0.5, model, reg, 1.0, q);
    benchmark::DoNotOptimize(next.mean.data());
  }
}

void bm_run_pipg_ridge(benchmark::State& bench) {
  RidgeGenConfig gen;
  gen.dimension = bench.range(0);
  gen.count = 1000;
  gen.seed = 7;
  const auto problem = pipg::datagen::generate_ridge(gen);
  const auto reg = pipg::models::QuadraticRegularizer::ridge(gen.dimension, 1e-2);
  pipg::solvers::SolverConfig config;
  config.gamma = 0.1;
  config.v0_scale = 100.0;
  config.rmse_stride = 1000000;  // trace overhead excluded
  for (auto _ : bench) {
    auto trace = pipg::solvers::run_pipg(problem.dataset,
                                         pipg::solvers::linear_observation_factory(), reg,
                                         config, problem.ground_truth);
    benchmark::DoNotOptimize(trace.final_state.mean.data());
  }
  bench.SetItemsProcessed(bench.iterations() * gen.count);
}

BENCHMARK(bm_rank_one_update)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(bm_pipg_step_linear)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(bm_pipg_step_general)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(bm_run_pipg_ridge)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
