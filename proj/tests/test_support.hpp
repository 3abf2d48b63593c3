#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseret/coders.hpp"
#include "sparseret/random.hpp"
#include "sparseret/synthetic.hpp"

namespace testsupport {

using sparseret::Rng;

// Unit-norm dictionary plus a unit-norm Gaussian signal.
struct Instance {
  Eigen::MatrixXd d;
  Eigen::VectorXd x;
};

inline Instance random_instance(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Instance in;
  in.d = sparseret::synthetic::random_unit_dictionary(rng, m, k);
  in.x = sparseret::synthetic::gaussian_vector(rng, m);
  in.x.normalize();
  return in;
}

// Objective of the l1 problem written out term by term, deliberately without
// going through Eigen expression templates for the residual.
inline double objective_oracle(const Eigen::MatrixXd& d, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& a, double lambda) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double r = x(i);
    for (Eigen::Index j = 0; j < d.cols(); ++j) r -= d(i, j) * a(j);
    sq += r * r;
  }
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) l1 += std::abs(a(j));
  return 0.5 * sq + lambda * l1;
}

// Largest violation of the l1 optimality conditions at `a`.
inline double kkt_violation(const Eigen::MatrixXd& d, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& a, double lambda) {
  const Eigen::VectorXd corr = d.transpose() * (x - d * a);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    double v;
    if (a(j) == 0.0) {
      v = std::abs(corr(j)) - lambda;
    } else {
      v = std::abs(corr(j) - lambda * (a(j) > 0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// Exhaustive best subset of size `t` by least squares via normal equations.
struct SubsetFit {
  std::vector<Eigen::Index> support;
  double residual = 0.0;
};

inline SubsetFit best_subset(const Eigen::MatrixXd& d, const Eigen::VectorXd& x, int t) {
  SubsetFit best;
  best.residual = std::numeric_limits<double>::infinity();
  const Eigen::Index k = d.cols();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(t));
  // Enumerate combinations in lexicographic order.
  for (int i = 0; i < t; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    Eigen::MatrixXd sub(d.rows(), t);
    for (int i = 0; i < t; ++i) sub.col(i) = d.col(idx[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd g = sub.transpose() * sub;
    const Eigen::VectorXd coef = g.ldlt().solve(sub.transpose() * x);
    const double r = (x - sub * coef).norm();
    if (r < best.residual) best = {idx, r};
    int pos = t - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == k - t + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < t; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
  return best;
}

inline std::vector<Eigen::Index> support_of(const Eigen::VectorXd& a) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a(j) != 0.0) s.push_back(j);
  }
  return s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sparseret_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace testsupport
