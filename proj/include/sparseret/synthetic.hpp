#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "sparseret/features_io.hpp"
#include "sparseret/random.hpp"

namespace sparseret::synthetic {

// Standard normal draw (Box-Muller over uniform01, portable across libraries).
double gaussian(Rng& rng);

Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n);

// m x k matrix of Gaussian columns scaled to unit norm.
Eigen::MatrixXd random_unit_dictionary(Rng& rng, Eigen::Index m, Eigen::Index k);

// n signals, each a combination of `sparsity` distinct random atoms with
// Gaussian coefficients. Columns of the result are signals.
Eigen::MatrixXd sparse_signals(Rng& rng, const Eigen::MatrixXd& dictionary, Eigen::Index n,
                               Eigen::Index sparsity);

struct LabeledData {
  FeatureSet features;
  Manifest manifest;
};

// `subjects` well-separated clusters of `per_subject` vectors each: a random
// unit centre per subject plus isotropic Gaussian noise of std `spread`.
// Ids are "s<subject>_<index>" zero-padded so lexicographic order matches
// generation order.
LabeledData clustered_dataset(std::size_t subjects, std::size_t per_subject, std::size_t dim,
                              double spread, std::uint64_t seed);

}  // namespace sparseret::synthetic
