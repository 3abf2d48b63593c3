#include <cmath>

#include "solvers.hpp"

namespace sparseret::detail {

SparseCode run_omp(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                   const CoderConfig& config) {
  const Eigen::Index k = dictionary.cols();
  const Eigen::Index m = dictionary.rows();
  SparseCode code;
  code.coeffs = Eigen::VectorXd::Zero(k);
  code.converged = true;

  std::vector<bool> blocked(static_cast<std::size_t>(k), false);
  std::vector<Eigen::Index> support;
  Eigen::VectorXd residual = x;
  const double floor = 1e-14 * x.norm();

  while (support.size() < config.sparsity && residual.norm() >= config.tol) {
    const Eigen::VectorXd corr = dictionary.transpose() * residual;
    Eigen::Index best = -1;
    double best_abs = floor;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (blocked[static_cast<std::size_t>(j)]) continue;
      if (std::abs(corr(j)) > best_abs) {
        best_abs = std::abs(corr(j));
        best = j;
      }
    }
    if (best < 0) break;
    ++code.iterations;

    const auto n = static_cast<Eigen::Index>(support.size()) + 1;
    Eigen::MatrixXd sub(m, n);
    for (Eigen::Index a = 0; a + 1 < n; ++a) sub.col(a) = dictionary.col(support[a]);
    sub.col(n - 1) = dictionary.col(best);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    blocked[static_cast<std::size_t>(best)] = true;
    if (qr.rank() < n) continue;  // candidate is (nearly) spanned by the support

    support.push_back(best);
    const Eigen::VectorXd sol = qr.solve(x);
    residual = x - sub * sol;
    code.coeffs.setZero();
    for (Eigen::Index a = 0; a < n; ++a) code.coeffs(support[a]) = sol(a);
  }
  return code;
}

}  // namespace sparseret::detail
