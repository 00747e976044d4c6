#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pipg/dataset.hpp"
#include "pipg/kalman.hpp"
#include "pipg/models.hpp"

namespace pipg::solvers {

// Step-size sequence for the incremental baselines. Indices are 0-based.
struct ScheduleConfig {
  enum class Kind {
    constant,          // base
    polynomial_decay,  // base / (k + 1)^decay_exponent
    rational_decay,    // alpha0 / (1 + alpha1 * k)
  };
  Kind kind = Kind::constant;
  double base = 1.0;
  double decay_exponent = 0.51;
  double alpha0 = 1.0;
  double alpha1 = 1e-4;
};

class StepSchedule {
 public:
  explicit StepSchedule(const ScheduleConfig& config);
  double at(std::int64_t k) const;

 private:
  ScheduleConfig config_;
};

struct SolverConfig {
  double gamma = 1.0;                 // loss weight / noise precision
  double v0_scale = 1.0;              // prior covariance = v0_scale * I unless v0 is set
  std::optional<Eigen::MatrixXd> v0;  // explicit SPD prior covariance
  double process_noise_scale = 0.0;   // q: additive noise q * I on the covariance prediction
  int passes = 1;
  bool shuffle = false;               // fresh per-pass permutation when true
  std::uint64_t seed = 0;             // drives the shuffle only
  std::optional<Eigen::VectorXd> theta0;  // prior mean, zero by default
  std::int64_t rmse_stride = 10;      // error-trace thinning; final iterate always recorded
  std::int64_t cov_stride = 0;        // 0 picks max(1, total/100)
};

struct TraceRecord {
  int pass = 1;            // 1-based
  std::int64_t iter = 0;   // global iteration, 0 = initial state
  double rmse = 0.0;       // NaN when no ground truth was supplied
};

struct CovDiagSnapshot {
  std::int64_t iter = 0;
  Eigen::VectorXd diag;
};

struct Trace {
  bool has_rmse = false;
  std::vector<TraceRecord> records;
  std::vector<CovDiagSnapshot> cov_diagonals;  // empty for solvers without a covariance
  kalman::PosteriorState final_state;          // cov is 0x0 for those solvers
};

// Builds a fresh observation model around one regressor row. The `linear`
// flag tells run_pipg it may use the exact covariance recursion (valid only
// together with a quadratic regularizer and zero process noise).
struct ObservationModelFactory {
  bool linear = false;
  std::function<std::unique_ptr<const models::ObservationModel>(
      Eigen::Ref<const Eigen::VectorXd>)>
      make;
};

ObservationModelFactory linear_observation_factory();
ObservationModelFactory sigmoid_observation_factory();

// Called after every measurement update (and once with the prior at iter 0).
using StateObserver =
    std::function<void(std::int64_t iter, const kalman::PosteriorState& state)>;

// One exact step for the linear observation / quadratic regularizer pair:
// transition M = I - gamma V G, prediction (M mean, M V M^T), then the
// rank-one measurement update with noise precision gamma.
kalman::PosteriorState pipg_step_linear(const kalman::PosteriorState& state,
                                        const Observation& obs,
                                        const models::QuadraticRegularizer& reg,
                                        double gamma);

// One linearized step for a general model: the mean moves through the step
// map evaluated with the pre-update covariance, the covariance through
// M V M^T + Q, and the measurement is linearized at the predicted mean.
kalman::PosteriorState pipg_step_general(const kalman::PosteriorState& state,
                                         double observed_output,
                                         const models::ObservationModel& model,
                                         const models::Regularizer& reg, double gamma,
                                         const Eigen::MatrixXd& process_noise);

// Full incremental run over the dataset. Records the relative error
// ||mean - truth|| / ||truth|| when ground truth is given.
Trace run_pipg(const Dataset& data, const ObservationModelFactory& factory,
               const models::Regularizer& reg, const SolverConfig& config,
               const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt,
               const StateObserver& observer = {});

// Incremental proximal gradient baseline (identity metric): gradient step on
// the regularizer, then the exact prox of the single-sample quadratic loss.
// Runs one pass in dataset order starting from zero.
Trace run_ipg(const Dataset& data, const models::QuadraticRegularizer& reg,
              const ScheduleConfig& schedule,
              const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt,
              std::int64_t rmse_stride = 10);

// Stochastic gradient baseline: theta <- theta - step * (grad f_k + grad g).
// Runs one pass in dataset order starting from zero.
Trace run_sgd(const Dataset& data, const ObservationModelFactory& factory,
              const models::Regularizer& reg, const ScheduleConfig& schedule,
              const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt,
              std::int64_t rmse_stride = 10);

}  // namespace pipg::solvers
