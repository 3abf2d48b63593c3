#include "sparseret/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace sparseret::synthetic {

double gaussian(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian(rng);
  return v;
}

Eigen::MatrixXd random_unit_dictionary(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Eigen::MatrixXd d(m, k);
  for (Eigen::Index j = 0; j < k; ++j) d.col(j) = gaussian_vector(rng, m).normalized();
  return d;
}

Eigen::MatrixXd sparse_signals(Rng& rng, const Eigen::MatrixXd& dictionary, Eigen::Index n,
                               Eigen::Index sparsity) {
  const Eigen::Index k = dictionary.cols();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dictionary.rows(), n);
  std::vector<Eigen::Index> atoms(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(atoms.begin(), atoms.end(), Eigen::Index{0});
    for (Eigen::Index s = 0; s < sparsity; ++s) {
      const auto pick = s + static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(k - s)));
      std::swap(atoms[static_cast<std::size_t>(s)], atoms[static_cast<std::size_t>(pick)]);
      x.col(i) += gaussian(rng) * dictionary.col(atoms[static_cast<std::size_t>(s)]);
    }
  }
  return x;
}

LabeledData clustered_dataset(std::size_t subjects, std::size_t per_subject, std::size_t dim,
                              double spread, std::uint64_t seed) {
  Rng rng(seed);
  const auto m = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd data(m, static_cast<Eigen::Index>(subjects * per_subject));
  std::vector<std::string> ids;
  std::vector<ManifestEntry> entries;
  char buf[64];
  for (std::size_t s = 0; s < subjects; ++s) {
    const Eigen::VectorXd centre = gaussian_vector(rng, m).normalized();
    for (std::size_t i = 0; i < per_subject; ++i) {
      const auto col = static_cast<Eigen::Index>(s * per_subject + i);
      data.col(col) = centre + spread * gaussian_vector(rng, m);
      std::snprintf(buf, sizeof(buf), "s%03zu_%04zu", s, i);
      ids.emplace_back(buf);
      std::snprintf(buf, sizeof(buf), "subject%03zu", s);
      entries.push_back({ids.back(), buf, Role::kAuto});
    }
  }
  return {FeatureSet(dim, std::move(data), std::move(ids)), Manifest(std::move(entries))};
}

}  // namespace sparseret::synthetic
