#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseret/coders.hpp"
#include "sparseret/features_io.hpp"

namespace sparseret {

enum class DictMethod { kKmeans, kKsvd };

DictMethod parse_dict_method(const std::string& name);
std::string to_string(DictMethod method);

// m x k matrix of unit-norm atoms. Each atom's largest-magnitude entry is
// positive (first such entry on ties).
class Dictionary {
 public:
  Dictionary(Eigen::MatrixXd atoms, DictMethod method, std::uint64_t seed,
             std::vector<double> train_log);

  std::size_t m() const { return static_cast<std::size_t>(atoms_.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  DictMethod method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  // Training RMSE, one entry per recorded iteration.
  const std::vector<double>& train_log() const { return train_log_; }

 private:
  Eigen::MatrixXd atoms_;
  DictMethod method_;
  std::uint64_t seed_;
  std::vector<double> train_log_;
};

struct DictLearnConfig {
  std::size_t k = 38;
  std::size_t iterations = 30;
  std::uint64_t seed = 0;
  // Pursuit used inside each K-SVD sweep.
  CoderConfig inner_coder = [] {
    CoderConfig c = CoderConfig::defaults(CoderMethod::kOmp);
    c.sparsity = 5;
    return c;
  }();
  std::size_t workers = 1;

  void validate() const;
};

// Scales to unit norm and flips so the largest-magnitude entry is positive.
// Returns false for a zero vector.
bool canonicalize_atom(Eigen::Ref<Eigen::VectorXd> atom);

// Best of ten Lloyd runs, each from greedy k-means++ seeding. train_log holds
// the chosen run's RMSE to the assigned centroid after seeding and after each
// iteration; it never increases.
Dictionary kmeans_learn(const FeatureSet& fs, const DictLearnConfig& config);

// K-SVD. train_log[0] is the RMSE of the initial dictionary under the inner
// coder; entry t is the RMSE after the dictionary update of sweep t.
Dictionary ksvd_learn(const FeatureSet& fs, const DictLearnConfig& config);

Dictionary learn_dictionary(const FeatureSet& fs, DictMethod method, const DictLearnConfig& config);

struct Rank1 {
  Eigen::VectorXd u;
  double sigma = 0.0;
  Eigen::VectorXd v;
};

// Leading singular triple by power iteration on E^T E (tol 1e-10, at most
// 1000 steps). The start vector is E^T start_hint when that is nonzero, else
// the normalized all-ones vector. u's largest-magnitude entry is made positive.
// Throws NumericError for a zero matrix.
Rank1 rank1_approx(const Eigen::MatrixXd& e, const Eigen::VectorXd* start_hint = nullptr);

// Dictionary file: "SDIC", u8 version, u32 JSON header length, the JSON header
// (m, k, method, seed, train_log), then m*k float32 little-endian values,
// atom-contiguous. Atoms are renormalized in double precision on load.
void write_dictionary(const Dictionary& dict, const std::filesystem::path& path);
Dictionary load_dictionary(const std::filesystem::path& path);

}  // namespace sparseret
