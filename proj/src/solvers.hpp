#pragma once

#include <Eigen/Dense>

#include "sparseret/coders.hpp"

namespace sparseret::detail {

// All solvers return coefficients only; SparseCoder fills in the objective.
// `correlations` is D^T x.

SparseCode run_ssf(const Eigen::MatrixXd& dictionary, const Eigen::MatrixXd& gram,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& correlations, double c,
                   const CoderConfig& config, const IterationObserver& observer);

// Cyclic coordinate descent; lambda2 = 0 gives the lasso.
SparseCode run_coordinate_descent(const Eigen::MatrixXd& gram, const Eigen::VectorXd& correlations,
                                  double lambda, double lambda2, const CoderConfig& config);

SparseCode run_homotopy(const Eigen::MatrixXd& gram, const Eigen::VectorXd& correlations,
                        const CoderConfig& config);

SparseCode run_omp(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                   const CoderConfig& config);

}  // namespace sparseret::detail
