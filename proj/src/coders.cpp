#include "sparseret/coders.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "solvers.hpp"
#include "sparseret/error.hpp"
#include "sparseret/parallel.hpp"

namespace sparseret {

namespace {

void check_dims(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                const Eigen::VectorXd& alpha) {
  if (x.size() != dictionary.rows() || alpha.size() != dictionary.cols()) {
    throw InputError("dimension mismatch: dictionary is " + std::to_string(dictionary.rows()) +
                     "x" + std::to_string(dictionary.cols()) + ", signal has " +
                     std::to_string(x.size()) + " entries, code has " +
                     std::to_string(alpha.size()));
  }
}

}  // namespace

CoderMethod parse_coder_method(const std::string& name) {
  if (name == "homotopy") return CoderMethod::kHomotopy;
  if (name == "lasso") return CoderMethod::kLasso;
  if (name == "elastic-net") return CoderMethod::kElasticNet;
  if (name == "ssf") return CoderMethod::kSsf;
  if (name == "omp") return CoderMethod::kOmp;
  throw InputError("unknown coder '" + name + "' (expected homotopy, lasso, elastic-net, ssf or omp)");
}

std::string to_string(CoderMethod method) {
  switch (method) {
    case CoderMethod::kHomotopy:
      return "homotopy";
    case CoderMethod::kLasso:
      return "lasso";
    case CoderMethod::kElasticNet:
      return "elastic-net";
    case CoderMethod::kSsf:
      return "ssf";
    case CoderMethod::kOmp:
      return "omp";
  }
  return "unknown";
}

CoderConfig CoderConfig::defaults(CoderMethod method) {
  CoderConfig config;
  config.method = method;
  config.max_iter = method == CoderMethod::kSsf ? 5000 : 1000;
  return config;
}

void CoderConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be >= 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw InputError("lambda2 must be >= 0");
  if (!(tol > 0.0)) throw InputError("tol must be > 0");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
  if (method == CoderMethod::kSsf && !(c_factor > 1.0)) {
    throw InputError("c_factor must exceed 1 so the SSF proximity term stays strictly convex");
  }
  if (method == CoderMethod::kOmp && sparsity < 1) throw InputError("OMP sparsity must be >= 1");
}

double objective_value(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& alpha, double lambda) {
  check_dims(dictionary, x, alpha);
  const double value = 0.5 * (x - dictionary * alpha).squaredNorm() + lambda * alpha.lpNorm<1>();
  if (!std::isfinite(value)) throw NumericError("objective is not finite");
  return value;
}

double spectral_norm_squared(const Eigen::MatrixXd& dictionary) {
  const Eigen::Index k = dictionary.cols();
  if (k == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(k) / std::sqrt(static_cast<double>(k));
  double estimate = 0.0;
  for (int step = 0; step < 500; ++step) {
    const Eigen::VectorXd w = dictionary.transpose() * (dictionary * v);
    estimate = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    // Stop once v is an eigenvector to within the tolerance.
    if ((w - estimate * v).norm() <= 1e-10 * estimate) return estimate;
    v = w / norm;
  }
  return (dictionary * v).squaredNorm();
}

double proximity_term(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& alpha,
                      const Eigen::VectorXd& alpha0, double c) {
  if (alpha.size() != dictionary.cols() || alpha0.size() != dictionary.cols()) {
    throw InputError("dimension mismatch between dictionary and codes");
  }
  // Validation wants the exact largest eigenvalue, not the iterative lower bound.
  const Eigen::MatrixXd gram = dictionary.rows() < dictionary.cols()
                                   ? Eigen::MatrixXd(dictionary * dictionary.transpose())
                                   : Eigen::MatrixXd(dictionary.transpose() * dictionary);
  const double bound =
      gram.size() == 0 ? 0.0
                       : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .maxCoeff();
  if (!(c > bound)) {
    throw InputError("c = " + std::to_string(c) + " does not exceed ||D||^2 = " +
                     std::to_string(bound) + "; proximity term would not be strictly convex");
  }
  const Eigen::VectorXd delta = alpha - alpha0;
  return 0.5 * c * delta.squaredNorm() - 0.5 * (dictionary * delta).squaredNorm();
}

double surrogate_value(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha0, double lambda,
                       double c) {
  return objective_value(dictionary, x, alpha, lambda) +
         proximity_term(dictionary, alpha, alpha0, c);
}

SparseCoder::SparseCoder(Eigen::MatrixXd dictionary, CoderConfig config)
    : dictionary_(std::move(dictionary)), config_(config) {
  config_.validate();
  if (dictionary_.cols() == 0) throw InputError("dictionary has no atoms");
  if (!dictionary_.allFinite()) throw InputError("dictionary has non-finite entries");
  gram_ = dictionary_.transpose() * dictionary_;
  if (config_.method == CoderMethod::kSsf) {
    ssf_c_ = config_.c_factor * spectral_norm_squared(dictionary_);
    if (!(ssf_c_ > 0.0)) throw InputError("dictionary has zero spectral norm");
  }
  if (config_.method == CoderMethod::kOmp &&
      config_.sparsity > static_cast<std::size_t>(dictionary_.cols())) {
    throw InputError("OMP sparsity " + std::to_string(config_.sparsity) + " exceeds atom count " +
                     std::to_string(dictionary_.cols()));
  }
}

SparseCode SparseCoder::encode(const Eigen::VectorXd& x, const IterationObserver& observer) const {
  if (x.size() != dictionary_.rows()) {
    throw InputError("signal has " + std::to_string(x.size()) + " entries, dictionary expects " +
                     std::to_string(dictionary_.rows()));
  }
  if (!x.allFinite()) throw InputError("signal has non-finite entries");

  SparseCode code;
  const Eigen::Index k = dictionary_.cols();
  if (x.isZero(0.0)) {
    code.coeffs = Eigen::VectorXd::Zero(k);
    code.converged = true;
  } else {
    const Eigen::VectorXd correlations = dictionary_.transpose() * x;
    switch (config_.method) {
      case CoderMethod::kSsf:
        code = detail::run_ssf(dictionary_, gram_, x, correlations, ssf_c_, config_, observer);
        break;
      case CoderMethod::kLasso:
        code = detail::run_coordinate_descent(gram_, correlations, config_.lambda, 0.0, config_);
        break;
      case CoderMethod::kElasticNet:
        code = detail::run_coordinate_descent(gram_, correlations, config_.lambda, config_.lambda2,
                                              config_);
        break;
      case CoderMethod::kHomotopy:
        code = detail::run_homotopy(gram_, correlations, config_);
        break;
      case CoderMethod::kOmp:
        code = detail::run_omp(dictionary_, x, config_);
        break;
    }
  }
  if (!code.coeffs.allFinite()) throw NumericError(to_string(config_.method) + " produced non-finite coefficients");
  code.objective = objective_value(dictionary_, x, code.coeffs, config_.lambda);
  return code;
}

namespace {

SparseCode encode_with(CoderMethod expected, const Eigen::MatrixXd& dictionary,
                       const Eigen::VectorXd& x, const CoderConfig& config,
                       const IterationObserver& observer = {}) {
  if (config.method != expected) {
    throw InputError("config selects " + to_string(config.method) + " but " + to_string(expected) +
                     " was requested");
  }
  return SparseCoder(dictionary, config).encode(x, observer);
}

}  // namespace

SparseCode ssf_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                      const CoderConfig& config, const IterationObserver& observer) {
  return encode_with(CoderMethod::kSsf, dictionary, x, config, observer);
}

SparseCode lasso_cd_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                           const CoderConfig& config) {
  return encode_with(CoderMethod::kLasso, dictionary, x, config);
}

SparseCode elastic_net_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                              const CoderConfig& config) {
  return encode_with(CoderMethod::kElasticNet, dictionary, x, config);
}

SparseCode homotopy_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                           const CoderConfig& config) {
  return encode_with(CoderMethod::kHomotopy, dictionary, x, config);
}

SparseCode omp_encode(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& x,
                      const CoderConfig& config) {
  return encode_with(CoderMethod::kOmp, dictionary, x, config);
}

std::vector<SparseCode> encode_batch(const SparseCoder& coder, const FeatureSet& fs,
                                     std::size_t workers) {
  if (fs.count() > 0 && static_cast<Eigen::Index>(fs.dim()) != coder.dictionary().rows()) {
    throw InputError("feature dim " + std::to_string(fs.dim()) + " does not match dictionary dim " +
                     std::to_string(coder.dictionary().rows()));
  }
  std::vector<SparseCode> codes(fs.count());
  parallel_for(fs.count(), workers, [&](std::size_t i) {
    try {
      codes[i] = coder.encode(fs.vector(i));
    } catch (const NumericError& e) {
      throw NumericError("encoding '" + fs.id(i) + "': " + e.what());
    } catch (const InputError& e) {
      throw InputError("encoding '" + fs.id(i) + "': " + e.what());
    }
  });
  return codes;
}

std::vector<SparseCode> encode_batch(const Eigen::MatrixXd& dictionary, const FeatureSet& fs,
                                     const CoderConfig& config, std::size_t workers) {
  return encode_batch(SparseCoder(dictionary, config), fs, workers);
}

}  // namespace sparseret
