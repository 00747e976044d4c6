#pragma once

#include <Eigen/Dense>

namespace pipg::kalman {

// Gaussian belief over the parameter vector.
struct PosteriorState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // dense, kept symmetric by every routine that touches it

  Eigen::Index dim() const { return mean.size(); }
};

// One scalar measurement reduced to the pieces the rank-one update needs:
// y ~ N(direction . theta_lin + offset, 1/noise_precision), where the offset
// is folded into predicted_output (the model output at the current mean).
struct MeasurementLinearization {
  Eigen::VectorXd direction;
  double predicted_output = 0.0;
  double observed_output = 0.0;
  double noise_precision = 1.0;
};

// (m + m^T) / 2. The result is exactly symmetric entry-for-entry.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

// T V T^T + Q, re-symmetrized.
Eigen::MatrixXd propagate_covariance(const Eigen::MatrixXd& cov,
                                     const Eigen::MatrixXd& transition,
                                     const Eigen::MatrixXd& process_noise);

// Time update: mean <- T mean, cov <- T cov T^T + Q.
PosteriorState predict(const PosteriorState& state, const Eigen::MatrixXd& transition,
                       const Eigen::MatrixXd& process_noise);

// Scalar measurement update. With residual r = observed - predicted and
// innovation variance s = 1/precision + d^T V d:
//   mean <- mean + (V d) r / s,  cov <- cov - (V d)(V d)^T / s.
// Throws InternalInvariantError if s falls below a tiny positive floor.
PosteriorState rank_one_update(const PosteriorState& state,
                               const MeasurementLinearization& meas);

}  // namespace pipg::kalman
