#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseret/features_io.hpp"

namespace sparseret {

// Sparse coding of a signal x over a fixed dictionary D (unit-norm atoms as
// columns), minimizing 0.5 * ||x - D a||^2 + lambda * ||a||_1.

enum class CoderMethod { kHomotopy, kLasso, kElasticNet, kSsf, kOmp };

CoderMethod parse_coder_method(const std::string& name);
std::string to_string(CoderMethod method);

struct CoderConfig {
  CoderMethod method = CoderMethod::kSsf;
  double lambda = 0.1;
  // Ridge weight, elastic net only: penalty lambda*||a||_1 + lambda2/2*||a||^2.
  double lambda2 = 0.1;
  // Maximum support size, OMP only.
  std::size_t sparsity = 5;
  // SSF step constant c = c_factor * sigma_max(D)^2; must exceed 1.
  double c_factor = 1.1;
  double tol = 1e-6;
  std::size_t max_iter = 1000;

  // Defaults for a method (SSF gets 5000 iterations, the rest 1000).
  static CoderConfig defaults(CoderMethod method);

  // Throws InputError on out-of-range parameters.
  void validate() const;
};

struct SparseCode {
  Eigen::VectorXd coeffs;
  std::size_t iterations = 0;
  bool converged = false;
  // 0.5 * ||x - D a||^2 + lambda * ||a||_1 at `coeffs`, whatever the method.
  double objective = 0.0;
};

// Per-iteration snapshot handed to an observer. `alpha_prev` is the iterate
// the next step expands around; `residual` is x - D * alpha_prev.
struct SolverState {
  Eigen::VectorXd alpha_prev;
  Eigen::VectorXd residual;
  std::vector<Eigen::Index> active_set;
};

using IterationObserver = std::function<void(std::size_t iteration, const SolverState&)>;

double objective_value(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& alpha, double lambda);

// d(a, a0) = c/2 ||a - a0||^2 - 1/2 ||D a - D a0||^2. Requires c > ||D||_2^2
// (strict convexity); throws InputError otherwise.
double proximity_term(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& alpha,
                      const Eigen::VectorXd& alpha0, double c);

// objective_value + proximity_term: a majorizer of the objective touching it at a0.
double surrogate_value(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha0, double lambda,
                       double c);

inline double soft_threshold(double v, double theta) {
  if (v > theta) return v - theta;
  if (v < -theta) return v + theta;
  return 0.0;
}

// Largest eigenvalue of D^T D by power iteration from the normalized all-ones
// vector (tol 1e-10 relative, at most 500 steps).
double spectral_norm_squared(const Eigen::MatrixXd& dictionary);

// Encoder bound to one dictionary and configuration. Precomputes the Gram
// matrix and, for SSF, the step constant, so it is cheap to reuse across
// signals. Immutable and safe to share between threads.
class SparseCoder {
 public:
  SparseCoder(Eigen::MatrixXd dictionary, CoderConfig config);

  SparseCode encode(const Eigen::VectorXd& x, const IterationObserver& observer = {}) const;

  const CoderConfig& config() const { return config_; }
  const Eigen::MatrixXd& dictionary() const { return dictionary_; }
  // SSF step constant (zero for other methods).
  double ssf_c() const { return ssf_c_; }

 private:
  Eigen::MatrixXd dictionary_;
  Eigen::MatrixXd gram_;
  CoderConfig config_;
  double ssf_c_ = 0.0;
};

// Single-signal entry points. Each requires config.method to match.
SparseCode ssf_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                      const CoderConfig& config, const IterationObserver& observer = {});
SparseCode lasso_cd_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                           const CoderConfig& config);
SparseCode elastic_net_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                              const CoderConfig& config);
SparseCode homotopy_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                           const CoderConfig& config);
SparseCode omp_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                      const CoderConfig& config);

// Encodes every vector of `fs`, preserving order. `workers` = 0 uses every
// hardware thread; the result does not depend on it. Errors name the id.
std::vector<SparseCode> encode_batch(const Eigen::MatrixXd& dictionary, const FeatureSet& fs,
                                     const CoderConfig& config, std::size_t workers = 1);
std::vector<SparseCode> encode_batch(const SparseCoder& coder, const FeatureSet& fs,
                                     std::size_t workers = 1);

}  // namespace sparseret
