#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "pipg/dataset.hpp"
#include "pipg/kalman.hpp"
#include "pipg/solvers.hpp"

namespace pipg::csv {

// All writers are atomic (write to a temporary in the same directory, then
// rename) and format doubles with %.17g so values round-trip exactly.

// Header `y,x_1,...,x_d`, one observation per line.
void write_dataset(const std::filesystem::path& file, const Dataset& data);

// One value per line, no header.
void write_ground_truth(const std::filesystem::path& file, const Eigen::VectorXd& truth);

// Parse errors carry 1-based line numbers and throw IoError.
Dataset read_dataset(const std::filesystem::path& file);
Eigen::VectorXd read_ground_truth(const std::filesystem::path& file);

// Header `pass,iter,rmse`, or `pass,iter` when the trace has no ground truth.
void write_trace(const std::filesystem::path& file, const solvers::Trace& trace);

// Header `index,mean,two_sigma` (1-based index, two_sigma = 2 sqrt(cov_ii)),
// or `index,mean` when the state carries no covariance.
void write_posterior(const std::filesystem::path& file, const kalman::PosteriorState& state);

// Header `iter,index,value`, one line per (snapshot, component).
void write_cov_diagonals(const std::filesystem::path& file,
                         const std::vector<solvers::CovDiagSnapshot>& snapshots);

}  // namespace pipg::csv
