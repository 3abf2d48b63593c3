#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparseret/dictionary.hpp"
#include "sparseret/error.hpp"
#include "sparseret/parallel.hpp"
#include "sparseret/random.hpp"

namespace sparseret {

namespace {

double rmse(const Eigen::MatrixXd& error) {
  return std::sqrt(error.squaredNorm() / static_cast<double>(error.size()));
}

// Codes as a k x n matrix, one column per signal.
Eigen::MatrixXd code_all(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& data,
                         const DictLearnConfig& config) {
  const SparseCoder coder(atoms, config.inner_coder);
  Eigen::MatrixXd codes(atoms.cols(), data.cols());
  parallel_for(static_cast<std::size_t>(data.cols()), config.workers, [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    codes.col(col) = coder.encode(data.col(col)).coeffs;
  });
  if (codes.isZero(0.0)) {
    throw NumericError("K-SVD inner coder (" + to_string(config.inner_coder.method) +
                       ") returned all-zero codes for every signal; reduce lambda");
  }
  return codes;
}

Eigen::MatrixXd initial_atoms(const Eigen::MatrixXd& data, std::size_t k, Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

  Eigen::MatrixXd atoms(data.rows(), static_cast<Eigen::Index>(k));
  std::size_t filled = 0;
  for (const auto idx : order) {
    if (filled == k) break;
    Eigen::VectorXd atom = data.col(idx);
    if (canonicalize_atom(atom)) atoms.col(static_cast<Eigen::Index>(filled++)) = atom;
  }
  if (filled < k) {
    throw InputError("K-SVD needs " + std::to_string(k) + " nonzero training signals, found " +
                     std::to_string(filled));
  }
  return atoms;
}

// Index of the signal with the largest residual among those not yet reused,
// or -1. Ties go to the lowest index.
Eigen::Index worst_signal(const Eigen::MatrixXd& error, const std::vector<bool>& reused) {
  Eigen::Index worst = -1;
  double worst_err = 0.0;
  for (Eigen::Index i = 0; i < error.cols(); ++i) {
    if (reused[static_cast<std::size_t>(i)]) continue;
    const double e = error.col(i).squaredNorm();
    if (e > worst_err) {
      worst_err = e;
      worst = i;
    }
  }
  return worst;
}

// Atoms that nearly duplicate an earlier atom, or that fewer than half the
// average signals-per-atom rely on, are swapped for the worst-represented
// signal. Their codes are cleared; the next sweep re-codes everything.
constexpr double kDuplicateCorrelation = 0.95;

void replace_redundant_atoms(Eigen::MatrixXd& atoms, Eigen::MatrixXd& codes, const Eigen::MatrixXd& data,
                             std::vector<bool>& reused) {
  Eigen::MatrixXd error = data - atoms * codes;
  const Eigen::Index min_users = std::max<Eigen::Index>(1, data.cols() / (2 * atoms.cols()));
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    Eigen::Index users = 0;
    for (Eigen::Index i = 0; i < codes.cols(); ++i) users += codes(j, i) != 0.0 ? 1 : 0;
    bool redundant = users < min_users;
    for (Eigen::Index other = 0; other < j && !redundant; ++other) {
      redundant = std::abs(atoms.col(other).dot(atoms.col(j))) > kDuplicateCorrelation;
    }
    if (!redundant) continue;
    const Eigen::Index worst = worst_signal(error, reused);
    if (worst < 0) return;
    Eigen::VectorXd atom = data.col(worst);
    if (!canonicalize_atom(atom)) continue;
    reused[static_cast<std::size_t>(worst)] = true;
    error.col(worst).setZero();
    atoms.col(j) = atom;
    codes.row(j).setZero();
  }
}

}  // namespace

Dictionary ksvd_learn(const FeatureSet& fs, const DictLearnConfig& config) {
  config.validate();
  if (fs.count() < config.k) {
    throw InputError("k = " + std::to_string(config.k) + " exceeds the " +
                     std::to_string(fs.count()) + " training vectors");
  }
  const Eigen::MatrixXd& data = fs.matrix();
  const Eigen::Index n = data.cols();
  const auto k = static_cast<Eigen::Index>(config.k);
  Rng rng(config.seed);
  Eigen::MatrixXd atoms = initial_atoms(data, config.k, rng);

  std::vector<double> log;
  Eigen::MatrixXd codes = code_all(atoms, data, config);
  log.push_back(rmse(data - atoms * codes));

  for (std::size_t sweep = 1; sweep <= config.iterations; ++sweep) {
    if (sweep > 1) codes = code_all(atoms, data, config);
    Eigen::MatrixXd error = data - atoms * codes;
    std::vector<bool> reused(static_cast<std::size_t>(n), false);

    for (Eigen::Index j = 0; j < k; ++j) {
      std::vector<Eigen::Index> users;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (codes(j, i) != 0.0) users.push_back(i);
      }

      bool dead = users.empty();
      if (!dead) {
        const auto count = static_cast<Eigen::Index>(users.size());
        Eigen::MatrixXd restricted(data.rows(), count);
        for (Eigen::Index u = 0; u < count; ++u) {
          restricted.col(u) = error.col(users[u]) + atoms.col(j) * codes(j, users[u]);
        }
        if (restricted.isZero(0.0)) {
          for (const auto i : users) codes(j, i) = 0.0;
          dead = true;
        } else {
          const Eigen::VectorXd hint = atoms.col(j);
          const Rank1 r = rank1_approx(restricted, &hint);
          atoms.col(j) = r.u;
          for (Eigen::Index u = 0; u < count; ++u) {
            const double coeff = r.sigma * r.v(u);
            codes(j, users[u]) = coeff;
            error.col(users[u]) = restricted.col(u) - r.u * coeff;
          }
        }
      }

      if (dead) {
        // Replace with the worst-represented signal not already used this sweep.
        const Eigen::Index worst = worst_signal(error, reused);
        if (worst >= 0) {
          Eigen::VectorXd atom = data.col(worst);
          if (canonicalize_atom(atom)) {
            atoms.col(j) = atom;
            reused[static_cast<std::size_t>(worst)] = true;
          }
        }
      }
    }
    replace_redundant_atoms(atoms, codes, data, reused);
    log.push_back(rmse(data - atoms * codes));
  }
  return Dictionary(std::move(atoms), DictMethod::kKsvd, config.seed, std::move(log));
}

}  // namespace sparseret
