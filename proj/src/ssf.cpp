#include <cmath>

#include "solvers.hpp"
#include "sparseret/error.hpp"

namespace sparseret::detail {

// Each step minimizes the separable surrogate around the current iterate:
//   a <- S(a + D^T (x - D a) / c, lambda / c),
// with D^T (x - D a) = D^T x - G a evaluated through the Gram matrix.
SparseCode run_ssf(const Eigen::MatrixXd& dictionary, const Eigen::MatrixXd& gram,
                   const Eigen::VectorXd& x, const Eigen::VectorXd& correlations, double c,
                   const CoderConfig& config, const IterationObserver& observer) {
  const Eigen::Index k = gram.cols();

  SparseCode code;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd next(k);
  SolverState state;
  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    // Thresholding c * (a + D^T r / c) at lambda keeps |D^T x| <= lambda exactly zero.
    const Eigen::VectorXd scaled = c * alpha + (correlations - gram * alpha);
    double change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      next(j) = soft_threshold(scaled(j), config.lambda) / c;
      change = std::max(change, std::abs(next(j) - alpha(j)));
    }
    if (!std::isfinite(change)) {
      throw NumericError("SSF iterate became non-finite at iteration " + std::to_string(it) +
                         " (ill-conditioned input)");
    }
    alpha.swap(next);
    code.iterations = it;
    if (observer) {
      state.alpha_prev = alpha;
      state.residual = x - dictionary * alpha;
      observer(it, state);
    }
    if (change < config.tol) {
      code.converged = true;
      break;
    }
  }
  code.coeffs = std::move(alpha);
  return code;
}

}  // namespace sparseret::detail
