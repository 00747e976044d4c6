#include "pipg/oracle.hpp"

#include <cmath>
#include <string>

#include "pipg/errors.hpp"

namespace pipg::oracle {
namespace {

Eigen::MatrixXd half_sum(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(half_sum(m));
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError(std::string(what) + " is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

void check_posterior_args(const Eigen::VectorXd& prior_mean, const Eigen::MatrixXd& prior_cov,
                          const Dataset& data, double gamma) {
  const Eigen::Index d = prior_mean.size();
  if (d == 0) {
    throw InvalidArgumentError("prior mean is empty");
  }
  if (prior_cov.rows() != d || prior_cov.cols() != d) {
    throw InvalidArgumentError("prior covariance dimension mismatch");
  }
  if (data.count() > 0 && data.dimension() != d) {
    throw InvalidArgumentError("dataset dimension does not match the prior");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("gamma must be finite and positive");
  }
  if (!prior_mean.allFinite() || !prior_cov.allFinite()) {
    throw NumericInputError("prior contains non-finite entries");
  }
}

}  // namespace

OraclePosterior batch_posterior(const Eigen::VectorXd& prior_mean,
                                const Eigen::MatrixXd& prior_cov, const Dataset& data,
                                double gamma) {
  check_posterior_args(prior_mean, prior_cov, data, gamma);
  const Eigen::Index d = prior_mean.size();

  Eigen::MatrixXd precision = spd_inverse(prior_cov, "prior covariance");
  Eigen::VectorXd rhs = precision * prior_mean;
  for (Eigen::Index k = 0; k < data.count(); ++k) {
    const auto x = data.regressors().row(k).transpose();
    precision += gamma * (x * x.transpose());
    rhs += gamma * data.outputs()[k] * x;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(half_sum(precision));
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("posterior precision is not positive definite");
  }
  OraclePosterior post;
  post.cov = half_sum(llt.solve(Eigen::MatrixXd::Identity(d, d)));
  post.mean = llt.solve(rhs);
  return post;
}

OraclePosterior state_space_posterior(const Eigen::VectorXd& prior_mean,
                                      const Eigen::MatrixXd& prior_cov, const Dataset& data,
                                      double gamma,
                                      const models::QuadraticRegularizer& reg) {
  check_posterior_args(prior_mean, prior_cov, data, gamma);
  const Eigen::Index d = prior_mean.size();
  if (reg.dimension() != d) {
    throw InvalidArgumentError("regularizer dimension does not match the prior");
  }

  const Eigen::MatrixXd& gram = reg.gram();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  // Replay the covariance recursion (measurement updates in information form)
  // to recover the transition sequence, while accumulating the batch
  // posterior over theta_0 in precision form.
  Eigen::MatrixXd v = half_sum(prior_cov);
  Eigen::MatrixXd phi = identity;
  Eigen::MatrixXd precision = spd_inverse(prior_cov, "prior covariance");
  Eigen::VectorXd rhs = precision * prior_mean;

  for (Eigen::Index k = 0; k < data.count(); ++k) {
    const auto x = data.regressors().row(k).transpose();
    const Eigen::MatrixXd m = identity - gamma * (v * gram);
    const Eigen::MatrixXd v_pred = half_sum(m * v * m.transpose());
    const Eigen::MatrixXd info =
        spd_inverse(v_pred, "prediction covariance") + gamma * (x * x.transpose());
    v = spd_inverse(info, "updated information matrix");

    phi = m * phi;
    const Eigen::VectorXd z = phi.transpose() * x;
    precision += gamma * (z * z.transpose());
    rhs += gamma * data.outputs()[k] * z;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(half_sum(precision));
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("posterior precision is not positive definite");
  }
  const Eigen::MatrixXd cov0 = half_sum(llt.solve(identity));
  const Eigen::VectorXd mean0 = llt.solve(rhs);

  OraclePosterior post;
  post.mean = phi * mean0;
  post.cov = half_sum(phi * cov0 * phi.transpose());
  return post;
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& theta,
    double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgumentError("finite-difference step must be finite and positive");
  }
  if (!theta.allFinite()) {
    throw NumericInputError("theta contains non-finite entries");
  }
  const Eigen::Index d = theta.size();
  Eigen::VectorXd probe = theta;
  Eigen::VectorXd grad(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    probe[i] = theta[i] + step;
    const double up = fn(probe);
    probe[i] = theta[i] - step;
    const double down = fn(probe);
    probe[i] = theta[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericInputError("function evaluated to a non-finite value");
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Eigen::MatrixXd finite_difference_hessian(
    const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& theta,
    double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgumentError("finite-difference step must be finite and positive");
  }
  if (!theta.allFinite()) {
    throw NumericInputError("theta contains non-finite entries");
  }
  const double outer = std::sqrt(step);
  const Eigen::Index d = theta.size();
  Eigen::VectorXd probe = theta;
  Eigen::MatrixXd hess(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    probe[i] = theta[i] + outer;
    const Eigen::VectorXd up = finite_difference_gradient(fn, probe, step);
    probe[i] = theta[i] - outer;
    const Eigen::VectorXd down = finite_difference_gradient(fn, probe, step);
    probe[i] = theta[i];
    hess.col(i) = (up - down) / (2.0 * outer);
  }
  return half_sum(hess);
}

Eigen::VectorXd numeric_prox(const Eigen::VectorXd& anchor, const Eigen::MatrixXd& metric,
                             const std::function<double(const Eigen::VectorXd&)>& loss,
                             double gamma) {
  const Eigen::Index d = anchor.size();
  if (d == 0) {
    throw InvalidArgumentError("prox anchor is empty");
  }
  if (metric.rows() != d || metric.cols() != d) {
    throw InvalidArgumentError("prox metric dimension mismatch");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgumentError("gamma must be finite and positive");
  }
  if (!anchor.allFinite()) {
    throw NumericInputError("prox anchor contains non-finite entries");
  }
  const Eigen::MatrixXd precision = spd_inverse(metric, "prox metric");

  const auto objective = [&](const Eigen::VectorXd& th) {
    const double l = loss(th);
    if (!std::isfinite(l)) {
      throw NumericInputError("loss evaluated to a non-finite value");
    }
    const Eigen::VectorXd delta = th - anchor;
    return gamma * l + 0.5 * delta.dot(precision * delta);
  };
  const auto gradient = [&](const Eigen::VectorXd& th) {
    return (gamma * finite_difference_gradient(loss, th) + precision * (th - anchor)).eval();
  };

  constexpr int kMaxIterations = 300;
  Eigen::VectorXd theta = anchor;
  double value = objective(theta);
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::VectorXd grad = gradient(theta);
    // Absolute tolerance with a relative guard: the finite-difference noise
    // floor scales with the objective's magnitude.
    if (grad.norm() <= 1e-10 * (1.0 + std::abs(value))) {
      return theta;
    }
    const Eigen::MatrixXd hess =
        half_sum(gamma * finite_difference_hessian(loss, theta) + precision);

    // Damp until the Newton system is positive definite and gives descent.
    Eigen::VectorXd direction;
    double damping = 0.0;
    const double scale = 1.0 + hess.trace() / static_cast<double>(d);
    for (;;) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(
          hess + damping * Eigen::MatrixXd::Identity(d, d));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        direction = -ldlt.solve(grad);
        if (direction.allFinite() && grad.dot(direction) < 0.0) {
          break;
        }
      }
      damping = damping == 0.0 ? 1e-8 * scale : damping * 10.0;
      if (damping > 1e12 * scale) {
        throw OracleFailureError("prox reference could not find a descent direction");
      }
    }

    // Backtracking with a small slack so that round-off near the minimum
    // cannot stall the line search forever.
    const double slope = grad.dot(direction);
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      const Eigen::VectorXd candidate = theta + t * direction;
      const double candidate_value = objective(candidate);
      if (candidate_value <= value + 1e-4 * t * slope + 1e-14 * (1.0 + std::abs(value))) {
        theta = candidate;
        value = candidate_value;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      throw OracleFailureError("prox reference line search failed to make progress");
    }
  }
  throw OracleFailureError("prox reference did not converge within the iteration budget");
}

}  // namespace pipg::oracle
