#pragma once

#include <vector>

#include <Eigen/Dense>

namespace pipg {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One scalar measurement paired with its regressor. The regressor is a view
// into storage owned elsewhere (usually a Dataset row), so an Observation
// must not outlive its source.
struct Observation {
  double output = 0.0;
  Eigen::Ref<const Eigen::VectorXd> regressor;
};

// In-memory regression problem: n regressor rows and n scalar outputs.
class Dataset {
 public:
  Dataset() = default;

  // Throws InvalidArgumentError on row/output count mismatch or zero columns,
  // NumericInputError if any entry is not finite. Zero rows are allowed (the
  // batch oracle accepts an empty dataset); solvers reject them.
  Dataset(RowMatrixXd regressors, Eigen::VectorXd outputs);

  Eigen::Index count() const { return regressors_.rows(); }
  Eigen::Index dimension() const { return regressors_.cols(); }

  const RowMatrixXd& regressors() const { return regressors_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }

  Observation observation(Eigen::Index k) const {
    return Observation{outputs_[k], regressors_.row(k).transpose()};
  }

  // New dataset with rows gathered in the given order.
  Dataset permuted(const std::vector<Eigen::Index>& order) const;

 private:
  RowMatrixXd regressors_;
  Eigen::VectorXd outputs_;
};

}  // namespace pipg
