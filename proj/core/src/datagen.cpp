#include "pipg/datagen.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "pipg/errors.hpp"
#include "pipg/rng.hpp"

namespace pipg::datagen {
namespace {

// Substream ids. Draw order within each stream is part of the reproducibility
// contract: see the data generation notes in the README.
enum Stream : std::uint64_t {
  kTruth = 0,
  kRegressors = 1,
  kNoise = 2,
  kSupport = 3,
};

void check_common(Eigen::Index dimension, std::int64_t count) {
  if (dimension < 1) {
    throw InvalidArgumentError("generator dimension must be at least 1");
  }
  if (count < 1) {
    throw InvalidArgumentError("generator count must be at least 1");
  }
}

double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

GeneratedProblem generate_ridge(const RidgeGenConfig& config) {
  check_common(config.dimension, config.count);
  if (!(config.noise_variance > 0.0) || !std::isfinite(config.noise_variance)) {
    throw InvalidArgumentError("noise variance must be finite and positive");
  }
  const Eigen::Index d = config.dimension;
  const Eigen::Index n = static_cast<Eigen::Index>(config.count);

  // One distribution object per stream: normal_distribution caches its second
  // variate, and a shared object would leak that cache across streams.
  auto truth_gen = rng::make_stream(config.seed, kTruth);
  std::normal_distribution<double> truth_unit(0.0, 1.0);
  Eigen::VectorXd truth(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    truth[i] = truth_unit(truth_gen);
  }

  auto regressor_gen = rng::make_stream(config.seed, kRegressors);
  std::normal_distribution<double> regressor_unit(0.0, 1.0);
  RowMatrixXd regressors(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      regressors(k, j) = regressor_unit(regressor_gen);
    }
  }

  auto noise_gen = rng::make_stream(config.seed, kNoise);
  std::normal_distribution<double> noise_unit(0.0, 1.0);
  const double noise_sd = std::sqrt(config.noise_variance);
  Eigen::VectorXd outputs = regressors * truth;
  for (Eigen::Index k = 0; k < n; ++k) {
    outputs[k] += noise_sd * noise_unit(noise_gen);
  }

  std::ostringstream meta;
  meta << "generate_ridge{dimension=" << d << ", count=" << n
       << ", noise_variance=" << config.noise_variance << ", seed=" << config.seed << "}";

  GeneratedProblem problem{Dataset(std::move(regressors), std::move(outputs)),
                           std::move(truth), meta.str()};
  return problem;
}

GeneratedProblem generate_sparse_nonlinear(const ARGenConfig& config) {
  check_common(config.dimension, config.count);
  if (!(std::abs(config.ar_coefficient) < 1.0)) {
    throw InvalidArgumentError("AR coefficient must satisfy |a| < 1");
  }
  if (!(config.noise_precision > 0.0) || !std::isfinite(config.noise_precision)) {
    throw InvalidArgumentError("noise precision must be finite and positive");
  }
  const Eigen::Index d = config.dimension;
  const Eigen::Index n = static_cast<Eigen::Index>(config.count);
  const Eigen::Index sparsity =
      config.sparsity == 0 ? std::max<Eigen::Index>(1, d / 10) : config.sparsity;
  if (sparsity < 1 || sparsity > d) {
    throw InvalidArgumentError("sparsity must lie in [1, dimension]");
  }

  // Support: partial Fisher-Yates over tap indices, then standard-normal values.
  auto support_gen = rng::make_stream(config.seed, kSupport);
  std::vector<Eigen::Index> taps(static_cast<std::size_t>(d));
  std::iota(taps.begin(), taps.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < sparsity; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, d - 1);
    std::swap(taps[static_cast<std::size_t>(i)],
              taps[static_cast<std::size_t>(pick(support_gen))]);
  }
  // One distribution object per stream; see generate_ridge.
  auto truth_gen = rng::make_stream(config.seed, kTruth);
  std::normal_distribution<double> truth_unit(0.0, 1.0);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < sparsity; ++i) {
    truth[taps[static_cast<std::size_t>(i)]] = truth_unit(truth_gen);
  }

  // AR(1) input signal.
  auto signal_gen = rng::make_stream(config.seed, kRegressors);
  std::normal_distribution<double> signal_unit(0.0, 1.0);
  Eigen::VectorXd signal(n);
  signal[0] = signal_unit(signal_gen);
  for (Eigen::Index k = 1; k < n; ++k) {
    signal[k] = config.ar_coefficient * signal[k - 1] + signal_unit(signal_gen);
  }

  // Row k holds the window [s_{k-d+1}, ..., s_k], wrapped circularly.
  RowMatrixXd regressors(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::Index idx = (((k - d + 1 + j) % n) + n) % n;
      regressors(k, j) = signal[idx];
    }
  }

  auto noise_gen = rng::make_stream(config.seed, kNoise);
  std::normal_distribution<double> noise_unit(0.0, 1.0);
  const double noise_sd = std::sqrt(1.0 / config.noise_precision);
  Eigen::VectorXd outputs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    outputs[k] = logistic(regressors.row(k).dot(truth)) + noise_sd * noise_unit(noise_gen);
  }

  std::ostringstream meta;
  meta << "generate_sparse_nonlinear{dimension=" << d << ", count=" << n
       << ", ar_coefficient=" << config.ar_coefficient
       << ", noise_precision=" << config.noise_precision << ", sparsity=" << sparsity
       << ", seed=" << config.seed << "}";

  GeneratedProblem problem{Dataset(std::move(regressors), std::move(outputs)),
                           std::move(truth), meta.str()};
  return problem;
}

double relative_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (estimate.size() != truth.size()) {
    throw InvalidArgumentError("relative_error requires equal-length vectors");
  }
  if (!estimate.allFinite() || !truth.allFinite()) {
    throw NumericInputError("relative_error received non-finite entries");
  }
  const double norm = truth.norm();
  if (!(norm > 0.0)) {
    throw InvalidArgumentError("relative_error requires a nonzero truth vector");
  }
  return (estimate - truth).norm() / norm;
}

}  // namespace pipg::datagen
