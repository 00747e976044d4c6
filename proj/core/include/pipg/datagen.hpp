#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "pipg/dataset.hpp"

namespace pipg::datagen {

// Linear-Gaussian problem: y_k = x_k . theta_star + noise.
struct RidgeGenConfig {
  Eigen::Index dimension = 1;
  std::int64_t count = 1;
  double noise_variance = 1.0;
  std::uint64_t seed = 0;
};

// Sparse sigmoid-output identification problem driven by an AR(1) input.
struct ARGenConfig {
  Eigen::Index dimension = 1;     // filter length
  std::int64_t count = 1;
  double ar_coefficient = 0.8;    // |a| < 1
  double noise_precision = 1.0;   // output noise ~ N(0, 1/noise_precision)
  Eigen::Index sparsity = 0;      // nonzero taps; 0 picks max(1, dimension/10)
  std::uint64_t seed = 0;
};

struct GeneratedProblem {
  Dataset dataset;
  Eigen::VectorXd ground_truth;
  std::string metadata;  // one-line echo of the generator and its parameters
};

// theta_star and regressor entries i.i.d. standard normal,
// y = X theta_star + N(0, noise_variance).
GeneratedProblem generate_ridge(const RidgeGenConfig& config);

// Scalar AR(1) signal s (s_0 ~ N(0,1), s_k = a s_{k-1} + N(0,1)); regressor k
// holds the d consecutive samples ending at s_k, wrapping circularly at the
// start; theta_star has `sparsity` standard-normal taps at random positions;
// y = sigmoid(x . theta_star) + N(0, 1/noise_precision).
GeneratedProblem generate_sparse_nonlinear(const ARGenConfig& config);

// ||estimate - truth|| / ||truth||.
double relative_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

}  // namespace pipg::datagen
