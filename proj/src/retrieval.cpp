#include "sparseret/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "file_util.hpp"
#include "sparseret/error.hpp"
#include "sparseret/parallel.hpp"

namespace sparseret {

Similarity parse_similarity(const std::string& name) {
  if (name == "cosine") return Similarity::kCosine;
  if (name == "euclidean") return Similarity::kNegativeEuclidean;
  throw InputError("unknown similarity '" + name + "' (expected cosine or euclidean)");
}

std::string to_string(Similarity similarity) {
  return similarity == Similarity::kCosine ? "cosine" : "euclidean";
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

RetrievalIndex::RetrievalIndex(Dictionary dictionary, CoderConfig coder, Similarity similarity,
                               FeatureSet gallery, std::vector<std::string> subjects,
                               Eigen::MatrixXd codes)
    : dictionary_(std::move(dictionary)),
      coder_(dictionary_.atoms(), coder),
      similarity_(similarity),
      gallery_(std::move(gallery)),
      subjects_(std::move(subjects)),
      codes_(std::move(codes)) {
  if (subjects_.size() != gallery_.count()) {
    throw InputError("index needs one subject per gallery item");
  }
  if (static_cast<std::size_t>(codes_.cols()) != gallery_.count() ||
      (gallery_.count() > 0 && static_cast<std::size_t>(codes_.rows()) != dictionary_.k())) {
    throw InputError("index code matrix does not match gallery and dictionary");
  }
  if (!codes_.allFinite()) throw NumericError("index holds non-finite codes");
}

RetrievalIndex build_index(const FeatureSet& gallery, std::vector<std::string> subjects,
                           const Dictionary& dictionary, const CoderConfig& coder,
                           Similarity similarity, std::size_t workers) {
  if (gallery.count() > 0 && gallery.dim() != dictionary.m()) {
    throw InputError("gallery dim " + std::to_string(gallery.dim()) +
                     " does not match dictionary dim " + std::to_string(dictionary.m()));
  }
  const SparseCoder encoder(dictionary.atoms(), coder);
  const auto codes = encode_batch(encoder, gallery, workers);
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(dictionary.k()),
                         static_cast<Eigen::Index>(codes.size()));
  for (std::size_t i = 0; i < codes.size(); ++i) matrix.col(static_cast<Eigen::Index>(i)) = codes[i].coeffs;
  return RetrievalIndex(dictionary, coder, similarity, gallery, std::move(subjects), std::move(matrix));
}

RankedList rank(const RetrievalIndex& index, const std::string& query_id,
                const Eigen::VectorXd& query_feature, TopN top_n) {
  if (index.size() == 0) throw InputError("cannot rank against an empty index");
  if (top_n && *top_n == 0) throw InputError("top_n must be positive");
  if (!query_feature.allFinite()) throw InputError("query '" + query_id + "' has non-finite values");

  RankedList list;
  list.query_id = query_id;
  const SparseCode code = index.coder().encode(query_feature);
  const std::size_t n = index.size();
  std::vector<double> scores(n);
  list.fallback = code.coeffs.isZero(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    if (list.fallback) {
      scores[i] = cosine_similarity(query_feature, index.gallery().vector(i));
    } else if (index.similarity() == Similarity::kCosine) {
      scores[i] = cosine_similarity(code.coeffs, index.codes().col(col));
    } else {
      scores[i] = -(code.coeffs - index.codes().col(col)).norm();
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto by_score = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t keep = top_n ? std::min(*top_n, n) : n;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), by_score);
  list.entries.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    list.entries.push_back({index.gallery().id(order[r]), scores[order[r]]});
  }
  return list;
}

std::vector<RankedList> batch_query(const RetrievalIndex& index, const FeatureSet& queries,
                                    TopN top_n, std::size_t workers) {
  if (queries.count() > 0 && queries.dim() != index.dictionary().m()) {
    throw InputError("query dim " + std::to_string(queries.dim()) +
                     " does not match index dim " + std::to_string(index.dictionary().m()));
  }
  std::vector<RankedList> out(queries.count());
  parallel_for(queries.count(), workers, [&](std::size_t i) {
    out[i] = rank(index, queries.id(i), queries.vector(i), top_n);
  });
  return out;
}

void write_ranked_lists(const std::vector<RankedList>& lists, const std::filesystem::path& path) {
  std::string out = "query_id,rank,gallery_id,score,fallback\n";
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      const auto& e = list.entries[r];
      out += list.query_id + ',' + std::to_string(r + 1) + ',' + e.gallery_id + ',' +
             detail::format_double(e.score) + ',' + (list.fallback ? "1" : "0") + '\n';
    }
  }
  detail::write_file(path, out);
}

std::vector<RankedList> load_ranked_lists(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const std::string name = path.string();
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      detail::strip_cr(line) != "query_id,rank,gallery_id,score,fallback") {
    throw InputError(name + ": expected header query_id,rank,gallery_id,score,fallback");
  }
  std::vector<RankedList> lists;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto stripped = detail::strip_cr(line);
    if (stripped.empty()) continue;
    const auto f = detail::split_fields(stripped);
    const std::string where = name + " row " + std::to_string(row);
    if (f.size() != 5) throw InputError(where + ": expected 5 fields");
    std::size_t rank_value = 0;
    double score = 0.0;
    if (std::from_chars(f[1].data(), f[1].data() + f[1].size(), rank_value).ec != std::errc() ||
        std::from_chars(f[3].data(), f[3].data() + f[3].size(), score).ec != std::errc() ||
        (f[4] != "0" && f[4] != "1")) {
      throw InputError(where + ": malformed values");
    }
    if (lists.empty() || lists.back().query_id != f[0]) {
      lists.push_back({std::string(f[0]), {}, f[4] == "1"});
    }
    auto& list = lists.back();
    if (rank_value != list.entries.size() + 1) {
      throw InputError(where + ": ranks for query '" + list.query_id + "' are not consecutive");
    }
    list.entries.push_back({std::string(f[2]), score});
  }
  return lists;
}

}  // namespace sparseret
