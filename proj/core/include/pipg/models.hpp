#pragma once

#include <Eigen/Dense>

#include "pipg/dataset.hpp"

namespace pipg::models {

// Twice-differentiable regularizer g. Gradients and Hessians are evaluated
// pointwise; implementations must accept any finite theta of their dimension.
class Regularizer {
 public:
  virtual ~Regularizer() = default;
  virtual double value(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const = 0;
};

// g = 0. Dimension is taken from the argument.
class ZeroRegularizer final : public Regularizer {
 public:
  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;
};

// g(theta) = 1/2 ||A theta||^2. Ridge is the special case A = sqrt(lambda) I.
class QuadraticRegularizer final : public Regularizer {
 public:
  explicit QuadraticRegularizer(Eigen::MatrixXd a);
  static QuadraticRegularizer ridge(Eigen::Index dim, double lambda);

  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;

  Eigen::Index dimension() const { return gram_.rows(); }
  const Eigen::MatrixXd& gram() const { return gram_; }  // A^T A

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd gram_;
};

// Smooth sparsity surrogate, applied per component:
//   g(theta) = strength * sum_i (sqrt(1 + theta_i^2 / smoothing^2) - 1)
// so g(0) = 0 and the Hessian is diagonal.
class SmoothedL2L1Regularizer final : public Regularizer {
 public:
  SmoothedL2L1Regularizer(double strength, double smoothing);

  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;

  double strength() const { return strength_; }
  double smoothing() const { return smoothing_; }

 private:
  double strength_;
  double smoothing_;
};

// Scalar-output measurement model h(theta) for one regressor, owning a copy
// of the regressor vector.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual double value(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const = 0;
};

// h(theta) = x . theta
class LinearObservation final : public ObservationModel {
 public:
  explicit LinearObservation(Eigen::VectorXd regressor);
  Eigen::Index dimension() const override { return regressor_.size(); }
  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;

 private:
  Eigen::VectorXd regressor_;
};

// h(theta) = 1 / (1 + exp(-x . theta))
class SigmoidObservation final : public ObservationModel {
 public:
  explicit SigmoidObservation(Eigen::VectorXd regressor);
  Eigen::Index dimension() const override { return regressor_.size(); }
  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;

 private:
  Eigen::VectorXd regressor_;
};

// argmin_theta gamma/2 (y - x.theta)^2 + 1/2 (theta - anchor)^T metric^-1 (theta - anchor),
// solved as a dense linear system in the precision form. metric must be SPD.
Eigen::VectorXd prox_quadratic_metric(const Eigen::VectorXd& anchor,
                                      const Eigen::MatrixXd& metric, const Observation& obs,
                                      double gamma);

// Same minimizer with the inverse metric supplied directly.
Eigen::VectorXd prox_quadratic_precision(const Eigen::VectorXd& anchor,
                                         const Eigen::MatrixXd& metric_precision,
                                         const Observation& obs, double gamma);

// theta - gamma * metric * grad g(theta): the variable-metric gradient step on g.
Eigen::VectorXd gradient_step_map(const Eigen::VectorXd& theta, const Eigen::MatrixXd& metric,
                                  double gamma, const Regularizer& reg);

// I - gamma * metric * hess g(theta): Jacobian of the step map, used as the
// state transition.
Eigen::MatrixXd transition_matrix(const Eigen::VectorXd& theta, const Eigen::MatrixXd& metric,
                                  double gamma, const Regularizer& reg);

}  // namespace pipg::models
