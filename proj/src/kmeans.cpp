#include <algorithm>
#include <cmath>
#include <limits>

#include "sparseret/dictionary.hpp"
#include "sparseret/error.hpp"
#include "sparseret/random.hpp"

namespace sparseret {

namespace {

constexpr std::size_t kRestarts = 10;

struct Assignment {
  std::vector<Eigen::Index> label;
  std::vector<double> dist2;
  double objective = 0.0;
};

Assignment assign(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids) {
  const Eigen::Index n = data.cols();
  Assignment a;
  a.label.resize(static_cast<std::size_t>(n));
  a.dist2.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
      const double d = (data.col(i) - centroids.col(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    a.label[static_cast<std::size_t>(i)] = best;
    a.dist2[static_cast<std::size_t>(i)] = best_d;
    a.objective += best_d;
  }
  return a;
}

double rmse(double objective, const Eigen::MatrixXd& data) {
  return std::sqrt(objective / static_cast<double>(data.size()));
}

// D^2 draw over the current distances; points already at distance zero are never chosen.
Eigen::Index d2_draw(const std::vector<double>& d2, double total, Rng& rng) {
  const double target = uniform01(rng) * total;
  Eigen::Index pick = -1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (d2[i] <= 0.0) continue;
    cumulative += d2[i];
    pick = static_cast<Eigen::Index>(i);
    if (cumulative > target) break;
  }
  return pick;
}

// Greedy k-means++: each step draws a few D^2 candidates and keeps the one
// that lowers the seeding potential the most.
Eigen::MatrixXd plus_plus_seeding(const Eigen::MatrixXd& data, std::size_t k, Rng& rng) {
  const Eigen::Index n = data.cols();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  Eigen::MatrixXd centroids(data.rows(), static_cast<Eigen::Index>(k));
  const auto first = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centroids.col(0) = data.col(first);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (data.col(i) - data.col(first)).squaredNorm();

  std::vector<double> candidate_d2(d2.size());
  std::vector<double> best_d2(d2.size());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (!(total > 0.0)) {
      throw InputError("cannot form " + std::to_string(k) +
                       " distinct atoms: the training data has only " + std::to_string(c) +
                       " distinct vectors");
    }
    Eigen::Index best = -1;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const Eigen::Index pick = d2_draw(d2, total, rng);
      double potential = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        candidate_d2[u] = std::min(d2[u], (data.col(i) - data.col(pick)).squaredNorm());
        potential += candidate_d2[u];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = pick;
        best_d2.swap(candidate_d2);
      }
    }
    centroids.col(static_cast<Eigen::Index>(c)) = data.col(best);
    d2 = best_d2;
  }
  return centroids;
}

// Means of the assigned points. Empty clusters take the point farthest from
// its own (updated) centroid; ties go to the lowest index.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& data, const Assignment& a, std::size_t k) {
  const Eigen::Index n = data.cols();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(data.rows(), static_cast<Eigen::Index>(k));
  std::vector<std::size_t> counts(k, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = a.label[static_cast<std::size_t>(i)];
    sums.col(c) += data.col(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  std::vector<Eigen::Index> empty;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      empty.push_back(static_cast<Eigen::Index>(c));
    } else {
      sums.col(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
    }
  }
  if (empty.empty()) return sums;

  std::vector<double> far(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    far[static_cast<std::size_t>(i)] = (data.col(i) - sums.col(a.label[static_cast<std::size_t>(i)])).squaredNorm();
  }
  for (const auto c : empty) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < far.size(); ++i) {
      if (far[i] > far[pick]) pick = i;
    }
    if (!(far[pick] > 0.0)) throw NumericError("k-means: no point available to re-seed an empty cluster");
    sums.col(c) = data.col(static_cast<Eigen::Index>(pick));
    far[pick] = 0.0;
  }
  return sums;
}

}  // namespace

Dictionary kmeans_learn(const FeatureSet& fs, const DictLearnConfig& config) {
  config.validate();
  if (fs.count() < config.k) {
    throw InputError("k = " + std::to_string(config.k) + " exceeds the " +
                     std::to_string(fs.count()) + " training vectors");
  }
  const Eigen::MatrixXd& data = fs.matrix();
  Rng rng(config.seed);
  Eigen::MatrixXd centroids;
  Assignment current;
  std::vector<double> log;
  // Lloyd cannot split a merged pair of clusters, so keep the best of several seedings.
  for (std::size_t restart = 0; restart < kRestarts; ++restart) {
    Eigen::MatrixXd run_centroids = plus_plus_seeding(data, config.k, rng);
    std::vector<double> run_log;
    Assignment run = assign(data, run_centroids);
    run_log.push_back(rmse(run.objective, data));
    for (std::size_t it = 0; it < config.iterations; ++it) {
      run_centroids = update_centroids(data, run, config.k);
      Assignment next = assign(data, run_centroids);
      run_log.push_back(rmse(next.objective, data));
      const bool stable = next.label == run.label;
      run = std::move(next);
      if (stable) break;
    }
    if (restart == 0 || run.objective < current.objective) {
      centroids = std::move(run_centroids);
      current = std::move(run);
      log = std::move(run_log);
    }
  }

  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    if (canonicalize_atom(centroids.col(c))) continue;
    // A centroid at the origin: fall back to its first member.
    bool replaced = false;
    for (std::size_t i = 0; i < current.label.size() && !replaced; ++i) {
      if (current.label[i] != c) continue;
      centroids.col(c) = data.col(static_cast<Eigen::Index>(i));
      replaced = canonicalize_atom(centroids.col(c));
    }
    if (!replaced) throw NumericError("k-means centroid " + std::to_string(c) + " is the zero vector");
  }
  return Dictionary(std::move(centroids), DictMethod::kKmeans, config.seed, std::move(log));
}

}  // namespace sparseret
