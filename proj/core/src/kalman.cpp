#include "pipg/kalman.hpp"

#include <cmath>
#include <string>

#include "pipg/errors.hpp"

namespace pipg::kalman {
namespace {

constexpr double kMinInnovationVariance = 1e-300;

void check_state(const PosteriorState& state) {
  if (state.mean.size() == 0) {
    throw InvalidArgumentError("posterior state is empty");
  }
  if (state.cov.rows() != state.mean.size() || state.cov.cols() != state.mean.size()) {
    throw InvalidArgumentError("covariance is " + std::to_string(state.cov.rows()) + "x" +
                               std::to_string(state.cov.cols()) + " but mean has dimension " +
                               std::to_string(state.mean.size()));
  }
  if (!state.mean.allFinite() || !state.cov.allFinite()) {
    throw NumericInputError("posterior state contains non-finite entries");
  }
}

}  // namespace

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw InvalidArgumentError("cannot symmetrize a non-square matrix");
  }
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd propagate_covariance(const Eigen::MatrixXd& cov,
                                     const Eigen::MatrixXd& transition,
                                     const Eigen::MatrixXd& process_noise) {
  const Eigen::Index d = cov.rows();
  if (cov.cols() != d || transition.rows() != d || transition.cols() != d ||
      process_noise.rows() != d || process_noise.cols() != d) {
    throw InvalidArgumentError("covariance propagation dimension mismatch");
  }
  if (!cov.allFinite() || !transition.allFinite() || !process_noise.allFinite()) {
    throw NumericInputError("covariance propagation received non-finite entries");
  }
  return symmetrize(transition * cov * transition.transpose() + process_noise);
}

PosteriorState predict(const PosteriorState& state, const Eigen::MatrixXd& transition,
                       const Eigen::MatrixXd& process_noise) {
  check_state(state);
  PosteriorState out;
  out.cov = propagate_covariance(state.cov, transition, process_noise);
  out.mean = transition * state.mean;
  return out;
}

PosteriorState rank_one_update(const PosteriorState& state,
                               const MeasurementLinearization& meas) {
  check_state(state);
  if (meas.direction.size() != state.mean.size()) {
    throw InvalidArgumentError("measurement direction has dimension " +
                               std::to_string(meas.direction.size()) + ", state has " +
                               std::to_string(state.mean.size()));
  }
  if (!meas.direction.allFinite() || !std::isfinite(meas.predicted_output) ||
      !std::isfinite(meas.observed_output) || !std::isfinite(meas.noise_precision)) {
    throw NumericInputError("measurement contains non-finite entries");
  }
  if (meas.noise_precision <= 0.0) {
    throw InvalidArgumentError("noise precision must be positive");
  }

  const Eigen::VectorXd gain_dir = state.cov * meas.direction;  // V d
  const double s = 1.0 / meas.noise_precision + meas.direction.dot(gain_dir);
  if (!(s >= kMinInnovationVariance)) {
    throw InternalInvariantError("innovation variance " + std::to_string(s) +
                                 " fell below the positive floor");
  }

  PosteriorState out;
  const double residual = meas.observed_output - meas.predicted_output;
  out.mean = state.mean + gain_dir * (residual / s);
  out.cov = symmetrize(state.cov - (gain_dir * gain_dir.transpose()) / s);
  return out;
}

}  // namespace pipg::kalman
