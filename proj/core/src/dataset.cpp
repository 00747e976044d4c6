#include "pipg/dataset.hpp"

#include <utility>
#include <vector>

#include "pipg/errors.hpp"

namespace pipg {

Dataset::Dataset(RowMatrixXd regressors, Eigen::VectorXd outputs)
    : regressors_(std::move(regressors)), outputs_(std::move(outputs)) {
  if (regressors_.cols() == 0) {
    throw InvalidArgumentError("dataset must have at least one regressor column");
  }
  if (outputs_.size() != regressors_.rows()) {
    throw InvalidArgumentError("dataset has " + std::to_string(regressors_.rows()) +
                               " regressor rows but " + std::to_string(outputs_.size()) +
                               " outputs");
  }
  if (!regressors_.allFinite() || !outputs_.allFinite()) {
    throw NumericInputError("dataset contains non-finite entries");
  }
}

Dataset Dataset::permuted(const std::vector<Eigen::Index>& order) const {
  if (static_cast<Eigen::Index>(order.size()) != count()) {
    throw InvalidArgumentError("permutation length does not match dataset size");
  }
  RowMatrixXd rows(count(), dimension());
  Eigen::VectorXd outs(count());
  for (Eigen::Index i = 0; i < count(); ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    if (src < 0 || src >= count()) {
      throw InvalidArgumentError("permutation index out of range");
    }
    rows.row(i) = regressors_.row(src);
    outs[i] = outputs_[src];
  }
  return Dataset(std::move(rows), std::move(outs));
}

}  // namespace pipg
