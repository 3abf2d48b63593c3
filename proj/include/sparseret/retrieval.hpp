#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseret/coders.hpp"
#include "sparseret/dictionary.hpp"
#include "sparseret/features_io.hpp"

namespace sparseret {

enum class Similarity { kCosine, kNegativeEuclidean };

Similarity parse_similarity(const std::string& name);
std::string to_string(Similarity similarity);

// Cosine of the angle between a and b; 0 when either is the zero vector.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

// Sparse codes of a gallery over one dictionary. Immutable once built;
// concurrent rank() calls are safe.
class RetrievalIndex {
 public:
  RetrievalIndex(Dictionary dictionary, CoderConfig coder, Similarity similarity,
                 FeatureSet gallery, std::vector<std::string> subjects, Eigen::MatrixXd codes);

  const Dictionary& dictionary() const { return dictionary_; }
  const SparseCoder& coder() const { return coder_; }
  Similarity similarity() const { return similarity_; }
  const FeatureSet& gallery() const { return gallery_; }
  const std::vector<std::string>& subjects() const { return subjects_; }
  // k x n, one column per gallery item.
  const Eigen::MatrixXd& codes() const { return codes_; }
  std::size_t size() const { return gallery_.count(); }

 private:
  Dictionary dictionary_;
  SparseCoder coder_;
  Similarity similarity_;
  FeatureSet gallery_;
  std::vector<std::string> subjects_;
  Eigen::MatrixXd codes_;
};

RetrievalIndex build_index(const FeatureSet& gallery, std::vector<std::string> subjects,
                           const Dictionary& dictionary, const CoderConfig& coder,
                           Similarity similarity = Similarity::kCosine, std::size_t workers = 1);

struct RankedEntry {
  std::string gallery_id;
  double score = 0.0;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;
  // Query code was all zero; scores are raw-feature cosine instead.
  bool fallback = false;
};

// nullopt = rank the whole gallery.
using TopN = std::optional<std::size_t>;

// Scores are descending; ties keep ascending gallery order.
RankedList rank(const RetrievalIndex& index, const std::string& query_id,
                const Eigen::VectorXd& query_feature, TopN top_n);

std::vector<RankedList> batch_query(const RetrievalIndex& index, const FeatureSet& queries,
                                    TopN top_n, std::size_t workers = 1);

// CSV `query_id,rank,gallery_id,score,fallback`, ranks 1-based.
void write_ranked_lists(const std::vector<RankedList>& lists, const std::filesystem::path& path);
std::vector<RankedList> load_ranked_lists(const std::filesystem::path& path);

}  // namespace sparseret
