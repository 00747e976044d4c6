#include "pipg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "pipg/errors.hpp"
#include "pipg/rng.hpp"

namespace pipg::solvers {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_step_size(double gamma, const char* who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError(std::string(who) + " must be finite and positive");
  }
}

std::string step_context(int pass, std::int64_t iter) {
  return "pass " + std::to_string(pass) + ", iteration " + std::to_string(iter) + ": ";
}

struct TruthInfo {
  bool present = false;
  Eigen::VectorXd values;
  double norm = 0.0;

  double rmse(const Eigen::VectorXd& mean) const {
    return present ? (mean - values).norm() / norm : kNan;
  }
};

TruthInfo resolve_truth(const std::optional<Eigen::VectorXd>& truth, Eigen::Index dim) {
  if (!truth) {
    return {};
  }
  if (truth->size() != dim) {
    throw InvalidArgumentError("ground truth has dimension " + std::to_string(truth->size()) +
                               ", dataset has " + std::to_string(dim));
  }
  if (!truth->allFinite()) {
    throw NumericInputError("ground truth contains non-finite entries");
  }
  const double norm = truth->norm();
  if (!(norm > 0.0)) {
    throw InvalidArgumentError("ground truth must have positive norm");
  }
  return {true, *truth, norm};
}

}  // namespace

StepSchedule::StepSchedule(const ScheduleConfig& config) : config_(config) {
  switch (config.kind) {
    case ScheduleConfig::Kind::constant:
      check_step_size(config.base, "constant step");
      break;
    case ScheduleConfig::Kind::polynomial_decay:
      check_step_size(config.base, "polynomial-decay base step");
      if (!(config.decay_exponent >= 0.0) || !std::isfinite(config.decay_exponent)) {
        throw InvalidArgumentError("decay exponent must be finite and nonnegative");
      }
      break;
    case ScheduleConfig::Kind::rational_decay:
      check_step_size(config.alpha0, "rational-decay alpha0");
      if (!(config.alpha1 >= 0.0) || !std::isfinite(config.alpha1)) {
        throw InvalidArgumentError("rational-decay alpha1 must be finite and nonnegative");
      }
      break;
  }
}

double StepSchedule::at(std::int64_t k) const {
  if (k < 0) {
    throw InvalidArgumentError("schedule index must be nonnegative");
  }
  double step = 0.0;
  switch (config_.kind) {
    case ScheduleConfig::Kind::constant:
      step = config_.base;
      break;
    case ScheduleConfig::Kind::polynomial_decay:
      step = config_.base / std::pow(static_cast<double>(k + 1), config_.decay_exponent);
      break;
    case ScheduleConfig::Kind::rational_decay:
      step = config_.alpha0 / (1.0 + config_.alpha1 * static_cast<double>(k));
      break;
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgumentError("schedule produced a nonpositive step at index " +
                               std::to_string(k));
  }
  return step;
}

ObservationModelFactory linear_observation_factory() {
  ObservationModelFactory factory;
  factory.linear = true;
  factory.make = [](Eigen::Ref<const Eigen::VectorXd> x) {
    return std::unique_ptr<const models::ObservationModel>(
        std::make_unique<const models::LinearObservation>(Eigen::VectorXd(x)));
  };
  return factory;
}

ObservationModelFactory sigmoid_observation_factory() {
  ObservationModelFactory factory;
  factory.linear = false;
  factory.make = [](Eigen::Ref<const Eigen::VectorXd> x) {
    return std::unique_ptr<const models::ObservationModel>(
        std::make_unique<const models::SigmoidObservation>(Eigen::VectorXd(x)));
  };
  return factory;
}

kalman::PosteriorState pipg_step_linear(const kalman::PosteriorState& state,
                                        const Observation& obs,
                                        const models::QuadraticRegularizer& reg,
                                        double gamma) {
  check_step_size(gamma, "step size");
  if (reg.dimension() != state.dim() || obs.regressor.size() != state.dim()) {
    throw InvalidArgumentError("regularizer/regressor dimension does not match the state");
  }

  const Eigen::MatrixXd m = models::transition_matrix(state.mean, state.cov, gamma, reg);
  kalman::PosteriorState predicted;
  predicted.mean = models::gradient_step_map(state.mean, state.cov, gamma, reg);
  predicted.cov = kalman::propagate_covariance(
      state.cov, m, Eigen::MatrixXd::Zero(state.dim(), state.dim()));

  kalman::MeasurementLinearization meas;
  meas.direction = obs.regressor;
  meas.predicted_output = meas.direction.dot(predicted.mean);
  meas.observed_output = obs.output;
  meas.noise_precision = gamma;
  return kalman::rank_one_update(predicted, meas);
}

kalman::PosteriorState pipg_step_general(const kalman::PosteriorState& state,
                                         double observed_output,
                                         const models::ObservationModel& model,
                                         const models::Regularizer& reg, double gamma,
                                         const Eigen::MatrixXd& process_noise) {
  check_step_size(gamma, "step size");
  if (model.dimension() != state.dim()) {
    throw InvalidArgumentError("observation model dimension does not match the state");
  }
  if (!std::isfinite(observed_output)) {
    throw NumericInputError("observed output is not finite");
  }

  const Eigen::MatrixXd m = models::transition_matrix(state.mean, state.cov, gamma, reg);
  kalman::PosteriorState predicted;
  predicted.mean = models::gradient_step_map(state.mean, state.cov, gamma, reg);
  predicted.cov = kalman::propagate_covariance(state.cov, m, process_noise);

  kalman::MeasurementLinearization meas;
  meas.direction = model.gradient(predicted.mean);
  meas.predicted_output = model.value(predicted.mean);
  meas.observed_output = observed_output;
  meas.noise_precision = gamma;
  return kalman::rank_one_update(predicted, meas);
}

Trace run_pipg(const Dataset& data, const ObservationModelFactory& factory,
               const models::Regularizer& reg, const SolverConfig& config,
               const std::optional<Eigen::VectorXd>& ground_truth,
               const StateObserver& observer) {
  const Eigen::Index d = data.dimension();
  const std::int64_t n = data.count();
  if (n < 1) {
    throw InvalidArgumentError("dataset is empty");
  }
  if (!factory.make) {
    throw InvalidArgumentError("observation model factory is empty");
  }
  check_step_size(config.gamma, "gamma");
  if (config.passes < 1) {
    throw InvalidArgumentError("passes must be at least 1");
  }
  if (config.rmse_stride < 1) {
    throw InvalidArgumentError("rmse stride must be at least 1");
  }
  if (config.cov_stride < 0) {
    throw InvalidArgumentError("covariance stride must be nonnegative");
  }
  if (!(config.process_noise_scale >= 0.0) || !std::isfinite(config.process_noise_scale)) {
    throw InvalidArgumentError("process noise scale must be finite and nonnegative");
  }

  kalman::PosteriorState state;
  if (config.theta0) {
    if (config.theta0->size() != d) {
      throw InvalidArgumentError("theta0 dimension does not match the dataset");
    }
    if (!config.theta0->allFinite()) {
      throw NumericInputError("theta0 contains non-finite entries");
    }
    state.mean = *config.theta0;
  } else {
    state.mean = Eigen::VectorXd::Zero(d);
  }
  if (config.v0) {
    if (config.v0->rows() != d || config.v0->cols() != d) {
      throw InvalidArgumentError("v0 must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (!config.v0->allFinite()) {
      throw NumericInputError("v0 contains non-finite entries");
    }
    state.cov = kalman::symmetrize(*config.v0);
    Eigen::LLT<Eigen::MatrixXd> llt(state.cov);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgumentError("v0 must be positive definite");
    }
  } else {
    if (!(config.v0_scale > 0.0) || !std::isfinite(config.v0_scale)) {
      throw InvalidArgumentError("v0 scale must be finite and positive");
    }
    state.cov = config.v0_scale * Eigen::MatrixXd::Identity(d, d);
  }

  const TruthInfo truth = resolve_truth(ground_truth, d);

  const auto* quadratic = dynamic_cast<const models::QuadraticRegularizer*>(&reg);
  const bool exact_path =
      factory.linear && quadratic != nullptr && config.process_noise_scale == 0.0;
  const Eigen::MatrixXd process_noise =
      config.process_noise_scale * Eigen::MatrixXd::Identity(d, d);

  const std::int64_t total = static_cast<std::int64_t>(config.passes) * n;
  const std::int64_t rmse_stride = config.rmse_stride;
  const std::int64_t cov_stride =
      config.cov_stride > 0 ? config.cov_stride : std::max<std::int64_t>(1, total / 100);

  Trace trace;
  trace.has_rmse = truth.present;
  trace.records.push_back({1, 0, truth.rmse(state.mean)});
  trace.cov_diagonals.push_back({0, state.cov.diagonal()});
  if (observer) {
    observer(0, state);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::int64_t iter = 0;
  for (int pass = 1; pass <= config.passes; ++pass) {
    if (config.shuffle) {
      // Stream id = pass number, so every pass gets an independent permutation
      // and pass p's order does not depend on how many passes precede it.
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      auto gen = rng::make_stream(config.seed, static_cast<std::uint64_t>(pass));
      std::shuffle(order.begin(), order.end(), gen);
    }
    for (std::int64_t i = 0; i < n; ++i) {
      const Eigen::Index k = order[static_cast<std::size_t>(i)];
      ++iter;
      try {
        if (exact_path) {
          state = pipg_step_linear(state, data.observation(k), *quadratic, config.gamma);
        } else {
          const auto model = factory.make(data.regressors().row(k).transpose());
          state = pipg_step_general(state, data.outputs()[k], *model, reg, config.gamma,
                                    process_noise);
        }
      } catch (const InternalInvariantError& e) {
        throw InternalInvariantError(step_context(pass, iter) + e.what());
      } catch (const IllConditionedError& e) {
        throw IllConditionedError(step_context(pass, iter) + e.what());
      } catch (const NumericInputError& e) {
        throw NumericInputError(step_context(pass, iter) + e.what());
      }
      if (iter % rmse_stride == 0 || iter == total) {
        trace.records.push_back({pass, iter, truth.rmse(state.mean)});
      }
      if (iter % cov_stride == 0 || iter == total) {
        trace.cov_diagonals.push_back({iter, state.cov.diagonal()});
      }
      if (observer) {
        observer(iter, state);
      }
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

Trace run_ipg(const Dataset& data, const models::QuadraticRegularizer& reg,
              const ScheduleConfig& schedule,
              const std::optional<Eigen::VectorXd>& ground_truth, std::int64_t rmse_stride) {
  const Eigen::Index d = data.dimension();
  const std::int64_t n = data.count();
  if (n < 1) {
    throw InvalidArgumentError("dataset is empty");
  }
  if (reg.dimension() != d) {
    throw InvalidArgumentError("regularizer dimension does not match the dataset");
  }
  if (rmse_stride < 1) {
    throw InvalidArgumentError("rmse stride must be at least 1");
  }
  const StepSchedule steps(schedule);
  const TruthInfo truth = resolve_truth(ground_truth, d);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  Trace trace;
  trace.has_rmse = truth.present;
  trace.records.push_back({1, 0, truth.rmse(theta)});

  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t iter = k + 1;
    const double step = steps.at(k);
    try {
      const Eigen::VectorXd anchor = theta - step * reg.gradient(theta);
      theta = models::prox_quadratic_precision(anchor, identity, data.observation(k), step);
    } catch (const IllConditionedError& e) {
      throw IllConditionedError(step_context(1, iter) + e.what());
    } catch (const NumericInputError& e) {
      throw NumericInputError(step_context(1, iter) + e.what());
    }
    if (iter % rmse_stride == 0 || iter == n) {
      trace.records.push_back({1, iter, truth.rmse(theta)});
    }
  }
  trace.final_state.mean = std::move(theta);
  return trace;
}

Trace run_sgd(const Dataset& data, const ObservationModelFactory& factory,
              const models::Regularizer& reg, const ScheduleConfig& schedule,
              const std::optional<Eigen::VectorXd>& ground_truth, std::int64_t rmse_stride) {
  const Eigen::Index d = data.dimension();
  const std::int64_t n = data.count();
  if (n < 1) {
    throw InvalidArgumentError("dataset is empty");
  }
  if (!factory.make) {
    throw InvalidArgumentError("observation model factory is empty");
  }
  if (rmse_stride < 1) {
    throw InvalidArgumentError("rmse stride must be at least 1");
  }
  const StepSchedule steps(schedule);
  const TruthInfo truth = resolve_truth(ground_truth, d);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);

  Trace trace;
  trace.has_rmse = truth.present;
  trace.records.push_back({1, 0, truth.rmse(theta)});

  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t iter = k + 1;
    const double step = steps.at(k);
    const auto model = factory.make(data.regressors().row(k).transpose());
    if (model->dimension() != d) {
      throw InvalidArgumentError("observation model dimension does not match the dataset");
    }
    const double residual = data.outputs()[k] - model->value(theta);
    const Eigen::VectorXd gradient = -residual * model->gradient(theta) + reg.gradient(theta);
    theta -= step * gradient;
    if (!theta.allFinite()) {
      throw NumericInputError("iteration " + std::to_string(iter) +
                              ": iterate became non-finite");
    }
    if (iter % rmse_stride == 0 || iter == n) {
      trace.records.push_back({1, iter, truth.rmse(theta)});
    }
  }
  trace.final_state.mean = std::move(theta);
  return trace;
}

}  // namespace pipg::solvers
