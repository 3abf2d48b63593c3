#include <cmath>

#include "solvers.hpp"
#include "sparseret/error.hpp"

namespace sparseret::detail {

SparseCode run_coordinate_descent(const Eigen::MatrixXd& gram, const Eigen::VectorXd& correlations,
                                  double lambda, double lambda2, const CoderConfig& config) {
  const Eigen::Index k = gram.cols();
  SparseCode code;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
  // gradient(j) = D_j^T (x - D alpha)
  Eigen::VectorXd gradient = correlations;
  for (std::size_t sweep = 1; sweep <= config.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double diag = gram(j, j);
      if (diag <= 0.0) continue;
      const double rho = gradient(j) + diag * alpha(j);
      const double updated = soft_threshold(rho, lambda) / (diag + lambda2);
      const double delta = updated - alpha(j);
      if (delta != 0.0) {
        gradient.noalias() -= gram.col(j) * delta;
        alpha(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (!std::isfinite(max_change)) {
      throw NumericError("coordinate descent diverged at sweep " + std::to_string(sweep));
    }
    code.iterations = sweep;
    if (max_change < config.tol) {
      code.converged = true;
      break;
    }
  }
  code.coeffs = std::move(alpha);
  return code;
}

}  // namespace sparseret::detail
