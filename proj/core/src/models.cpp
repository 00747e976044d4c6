#include "pipg/models.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "pipg/errors.hpp"
#include "pipg/kalman.hpp"

namespace pipg::models {
namespace {

void check_theta(const Eigen::VectorXd& theta) {
  if (!theta.allFinite()) {
    throw NumericInputError("theta contains non-finite entries");
  }
}

void check_theta_dim(const Eigen::VectorXd& theta, Eigen::Index dim, const char* who) {
  if (theta.size() != dim) {
    throw InvalidArgumentError(std::string(who) + ": theta has dimension " +
                               std::to_string(theta.size()) + ", expected " +
                               std::to_string(dim));
  }
  check_theta(theta);
}

double stable_logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double ZeroRegularizer::value(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return 0.0;
}

Eigen::VectorXd ZeroRegularizer::gradient(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return Eigen::VectorXd::Zero(theta.size());
}

Eigen::MatrixXd ZeroRegularizer::hessian(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return Eigen::MatrixXd::Zero(theta.size(), theta.size());
}

QuadraticRegularizer::QuadraticRegularizer(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() == 0 || a_.cols() == 0) {
    throw InvalidArgumentError("quadratic regularizer matrix is empty");
  }
  if (!a_.allFinite()) {
    throw NumericInputError("quadratic regularizer matrix contains non-finite entries");
  }
  gram_ = kalman::symmetrize(a_.transpose() * a_);
}

QuadraticRegularizer QuadraticRegularizer::ridge(Eigen::Index dim, double lambda) {
  if (dim <= 0) {
    throw InvalidArgumentError("ridge dimension must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("ridge weight must be finite and nonnegative");
  }
  return QuadraticRegularizer(std::sqrt(lambda) *
                              Eigen::MatrixXd::Identity(dim, dim));
}

double QuadraticRegularizer::value(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, a_.cols(), "quadratic regularizer");
  return 0.5 * (a_ * theta).squaredNorm();
}

Eigen::VectorXd QuadraticRegularizer::gradient(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, a_.cols(), "quadratic regularizer");
  return gram_ * theta;
}

Eigen::MatrixXd QuadraticRegularizer::hessian(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, a_.cols(), "quadratic regularizer");
  return gram_;
}

SmoothedL2L1Regularizer::SmoothedL2L1Regularizer(double strength, double smoothing)
    : strength_(strength), smoothing_(smoothing) {
  if (!(strength > 0.0) || !std::isfinite(strength)) {
    throw InvalidArgumentError("smoothed l2-l1 strength must be finite and positive");
  }
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw InvalidArgumentError("smoothed l2-l1 smoothing must be finite and positive");
  }
}

double SmoothedL2L1Regularizer::value(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double u = theta[i] * theta[i] / (smoothing_ * smoothing_);
    sum += u / (std::sqrt(1.0 + u) + 1.0);  // sqrt(1+u) - 1 without cancellation
  }
  return strength_ * sum;
}

Eigen::VectorXd SmoothedL2L1Regularizer::gradient(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const double d2 = smoothing_ * smoothing_;
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    g[i] = strength_ * theta[i] / (d2 * std::sqrt(1.0 + theta[i] * theta[i] / d2));
  }
  return g;
}

Eigen::MatrixXd SmoothedL2L1Regularizer::hessian(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const double d2 = smoothing_ * smoothing_;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double w = 1.0 + theta[i] * theta[i] / d2;
    h(i, i) = strength_ / (d2 * w * std::sqrt(w));
  }
  return h;
}

LinearObservation::LinearObservation(Eigen::VectorXd regressor)
    : regressor_(std::move(regressor)) {
  if (regressor_.size() == 0) {
    throw InvalidArgumentError("linear observation regressor is empty");
  }
  if (!regressor_.allFinite()) {
    throw NumericInputError("linear observation regressor contains non-finite entries");
  }
}

double LinearObservation::value(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, regressor_.size(), "linear observation");
  return regressor_.dot(theta);
}

Eigen::VectorXd LinearObservation::gradient(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, regressor_.size(), "linear observation");
  return regressor_;
}

SigmoidObservation::SigmoidObservation(Eigen::VectorXd regressor)
    : regressor_(std::move(regressor)) {
  if (regressor_.size() == 0) {
    throw InvalidArgumentError("sigmoid observation regressor is empty");
  }
  if (!regressor_.allFinite()) {
    throw NumericInputError("sigmoid observation regressor contains non-finite entries");
  }
}

double SigmoidObservation::value(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, regressor_.size(), "sigmoid observation");
  return stable_logistic(regressor_.dot(theta));
}

Eigen::VectorXd SigmoidObservation::gradient(const Eigen::VectorXd& theta) const {
  check_theta_dim(theta, regressor_.size(), "sigmoid observation");
  const double v = stable_logistic(regressor_.dot(theta));
  return v * (1.0 - v) * regressor_;
}

namespace {

Eigen::VectorXd prox_with_precision(const Eigen::VectorXd& anchor,
                                    const Eigen::MatrixXd& precision, const Observation& obs,
                                    double gamma) {
  const Eigen::Index d = anchor.size();
  const Eigen::MatrixXd lhs =
      precision + gamma * (obs.regressor * obs.regressor.transpose());
  const Eigen::VectorXd rhs = precision * anchor + gamma * obs.output * obs.regressor;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw IllConditionedError("prox system is not positive definite");
  }
  Eigen::VectorXd sol = ldlt.solve(rhs);
  if (!sol.allFinite() || sol.size() != d) {
    throw IllConditionedError("prox solve produced non-finite result");
  }
  return sol;
}

void check_prox_args(const Eigen::VectorXd& anchor, Eigen::Index metric_rows,
                     Eigen::Index metric_cols, const Observation& obs, double gamma) {
  const Eigen::Index d = anchor.size();
  if (d == 0) {
    throw InvalidArgumentError("prox anchor is empty");
  }
  if (metric_rows != d || metric_cols != d) {
    throw InvalidArgumentError("prox metric is " + std::to_string(metric_rows) + "x" +
                               std::to_string(metric_cols) + ", expected " +
                               std::to_string(d) + "x" + std::to_string(d));
  }
  if (obs.regressor.size() != d) {
    throw InvalidArgumentError("prox regressor dimension mismatch");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("prox step size must be finite and positive");
  }
  if (!anchor.allFinite() || !obs.regressor.allFinite() || !std::isfinite(obs.output)) {
    throw NumericInputError("prox received non-finite inputs");
  }
}

}  // namespace

Eigen::VectorXd prox_quadratic_metric(const Eigen::VectorXd& anchor,
                                      const Eigen::MatrixXd& metric, const Observation& obs,
                                      double gamma) {
  check_prox_args(anchor, metric.rows(), metric.cols(), obs, gamma);
  if (!metric.allFinite()) {
    throw NumericInputError("prox metric contains non-finite entries");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(metric);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("prox metric is not positive definite");
  }
  const Eigen::MatrixXd precision =
      llt.solve(Eigen::MatrixXd::Identity(anchor.size(), anchor.size()));
  return prox_with_precision(anchor, precision, obs, gamma);
}

Eigen::VectorXd prox_quadratic_precision(const Eigen::VectorXd& anchor,
                                         const Eigen::MatrixXd& metric_precision,
                                         const Observation& obs, double gamma) {
  check_prox_args(anchor, metric_precision.rows(), metric_precision.cols(), obs, gamma);
  if (!metric_precision.allFinite()) {
    throw NumericInputError("prox precision contains non-finite entries");
  }
  return prox_with_precision(anchor, metric_precision, obs, gamma);
}

Eigen::VectorXd gradient_step_map(const Eigen::VectorXd& theta, const Eigen::MatrixXd& metric,
                                  double gamma, const Regularizer& reg) {
  if (metric.rows() != theta.size() || metric.cols() != theta.size()) {
    throw InvalidArgumentError("step map metric dimension mismatch");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("step map step size must be finite and positive");
  }
  check_theta(theta);
  return theta - gamma * (metric * reg.gradient(theta));
}

Eigen::MatrixXd transition_matrix(const Eigen::VectorXd& theta, const Eigen::MatrixXd& metric,
                                  double gamma, const Regularizer& reg) {
  if (metric.rows() != theta.size() || metric.cols() != theta.size()) {
    throw InvalidArgumentError("transition metric dimension mismatch");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("transition step size must be finite and positive");
  }
  check_theta(theta);
  return Eigen::MatrixXd::Identity(theta.size(), theta.size()) -
         gamma * (metric * reg.hessian(theta));
}

}  // namespace pipg::models
