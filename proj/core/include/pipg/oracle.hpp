#pragma once

#include <functional>

#include <Eigen/Dense>

#include "pipg/dataset.hpp"
#include "pipg/models.hpp"

namespace pipg::oracle {

// Brute-force references for tests. Deliberately simple and slow; they share
// no kernels with the production code paths they cross-check.

struct OraclePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Gaussian posterior for the static linear model in precision form:
//   cov = (prior_cov^-1 + gamma sum x x^T)^-1
//   mean = cov (prior_cov^-1 prior_mean + gamma sum y x)
// An empty dataset returns the prior.
OraclePosterior batch_posterior(const Eigen::VectorXd& prior_mean,
                                const Eigen::MatrixXd& prior_cov, const Dataset& data,
                                double gamma);

// Exact posterior of the contraction-chain state-space model: replays the
// filter's covariance recursion (information-form measurement updates) to get
// the transition sequence M_k, reduces every observation to a row acting on
// theta_0 via the cumulative products Phi_k = M_k ... M_1, solves the batch
// Gaussian posterior over theta_0, and pushes it through Phi_n.
OraclePosterior state_space_posterior(const Eigen::VectorXd& prior_mean,
                                      const Eigen::MatrixXd& prior_cov, const Dataset& data,
                                      double gamma, const models::QuadraticRegularizer& reg);

// Minimizes gamma*loss(theta) + 1/2 (theta-anchor)^T metric^-1 (theta-anchor)
// by damped Newton on finite-difference derivatives, to gradient norm < 1e-10.
// Throws OracleFailureError if the iteration budget runs out.
Eigen::VectorXd numeric_prox(const Eigen::VectorXd& anchor, const Eigen::MatrixXd& metric,
                             const std::function<double(const Eigen::VectorXd&)>& loss,
                             double gamma);

// Central finite differences.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& theta,
    double step = 1e-6);

// Central differences of the finite-difference gradient, with the outer step
// widened to sqrt(step) to keep rounding error below truncation error.
Eigen::MatrixXd finite_difference_hessian(
    const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& theta,
    double step = 1e-6);

}  // namespace pipg::oracle
