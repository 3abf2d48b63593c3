#include "sparseret/dictionary.hpp"

#include <cmath>
#include <cstring>

#include "file_util.hpp"
#include "json.hpp"
#include "sparseret/error.hpp"

namespace sparseret {

namespace {

constexpr char kDictMagic[4] = {'S', 'D', 'I', 'C'};
constexpr std::uint8_t kDictVersion = 1;

Eigen::Index largest_magnitude_index(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

DictMethod parse_dict_method(const std::string& name) {
  if (name == "kmeans") return DictMethod::kKmeans;
  if (name == "ksvd") return DictMethod::kKsvd;
  throw InputError("unknown dictionary method '" + name + "' (expected kmeans or ksvd)");
}

std::string to_string(DictMethod method) {
  return method == DictMethod::kKmeans ? "kmeans" : "ksvd";
}

bool canonicalize_atom(Eigen::Ref<Eigen::VectorXd> atom) {
  const double norm = atom.norm();
  if (norm == 0.0 || !std::isfinite(norm)) return false;
  atom /= norm;
  if (atom(largest_magnitude_index(atom)) < 0.0) atom = -atom;
  return true;
}

Dictionary::Dictionary(Eigen::MatrixXd atoms, DictMethod method, std::uint64_t seed,
                       std::vector<double> train_log)
    : atoms_(std::move(atoms)), method_(method), seed_(seed), train_log_(std::move(train_log)) {
  if (atoms_.cols() < 1 || atoms_.rows() < 1) throw InputError("dictionary must have at least one atom");
  if (!atoms_.allFinite()) throw NumericError("dictionary has non-finite entries");
  for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
    const auto atom = atoms_.col(j);
    if (std::abs(atom.norm() - 1.0) > 1e-10) {
      throw NumericError("atom " + std::to_string(j) + " is not unit norm");
    }
    if (atom(largest_magnitude_index(atom)) < 0.0) {
      throw NumericError("atom " + std::to_string(j) + " violates the sign convention");
    }
  }
}

void DictLearnConfig::validate() const {
  if (k < 1) throw InputError("atom count must be >= 1");
  if (iterations < 1) throw InputError("dictionary iterations must be >= 1");
  inner_coder.validate();
}

Dictionary learn_dictionary(const FeatureSet& fs, DictMethod method, const DictLearnConfig& config) {
  return method == DictMethod::kKmeans ? kmeans_learn(fs, config) : ksvd_learn(fs, config);
}

Rank1 rank1_approx(const Eigen::MatrixXd& e, const Eigen::VectorXd* start_hint) {
  if (e.size() == 0 || e.isZero(0.0)) throw NumericError("rank-1 approximation of a zero matrix");
  if (!e.allFinite()) throw NumericError("rank-1 approximation of a non-finite matrix");

  Eigen::VectorXd v;
  if (start_hint != nullptr && start_hint->size() == e.rows()) {
    v = e.transpose() * *start_hint;
  }
  if (v.size() == 0 || v.norm() == 0.0) v = Eigen::VectorXd::Ones(e.cols());
  v.normalize();

  for (int step = 0; step < 1000; ++step) {
    Eigen::VectorXd w = e.transpose() * (e * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      // Start vector fell in the null space; restart from the largest column.
      Eigen::Index col = 0;
      e.colwise().squaredNorm().maxCoeff(&col);
      w = Eigen::VectorXd::Unit(e.cols(), col);
    } else {
      w /= norm;
    }
    const double change = (w - v).norm();
    v = std::move(w);
    if (change < 1e-10) break;
  }

  Rank1 out;
  out.u = e * v;
  out.sigma = out.u.norm();
  out.u /= out.sigma;
  out.v = std::move(v);
  if (out.u(largest_magnitude_index(out.u)) < 0.0) {
    out.u = -out.u;
    out.v = -out.v;
  }
  return out;
}

void write_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  const nlohmann::json header = {{"m", dict.m()},
                                 {"k", dict.k()},
                                 {"method", to_string(dict.method())},
                                 {"seed", dict.seed()},
                                 {"train_log", dict.train_log()}};
  const std::string text = header.dump();
  std::string out(kDictMagic, 4);
  out.push_back(static_cast<char>(kDictVersion));
  const auto len = static_cast<std::uint32_t>(text.size());
  char len_bytes[4];
  std::memcpy(len_bytes, &len, 4);
  out.append(len_bytes, 4);
  out += text;
  const auto& atoms = dict.atoms();
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    for (Eigen::Index i = 0; i < atoms.rows(); ++i) append_f32_le(out, static_cast<float>(atoms(i, j)));
  }
  detail::write_file(path, out);
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  const std::string name = path.string();
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kDictMagic, 4) != 0) {
    throw InputError(name + ": not a dictionary file");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kDictVersion) {
    throw InputError(name + ": unsupported dictionary version");
  }
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 5, 4);
  if (bytes.size() < 9 + static_cast<std::size_t>(len)) throw InputError(name + ": truncated header");
  nlohmann::json header;
  std::size_t m = 0;
  std::size_t k = 0;
  DictMethod method{};
  std::uint64_t seed = 0;
  std::vector<double> log;
  try {
    header = nlohmann::json::parse(bytes.substr(9, len));
    m = header.at("m").get<std::size_t>();
    k = header.at("k").get<std::size_t>();
    method = parse_dict_method(header.at("method").get<std::string>());
    seed = header.at("seed").get<std::uint64_t>();
    log = header.at("train_log").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(name + ": malformed dictionary header: " + e.what());
  }
  const std::size_t offset = 9 + len;
  if (m == 0 || k == 0 || bytes.size() != offset + 4 * m * k) {
    throw InputError(name + ": atom payload does not match header dimensions");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_f32_le(p + 4 * (j * m + i));
    }
    if (!canonicalize_atom(atoms.col(static_cast<Eigen::Index>(j)))) {
      throw InputError(name + ": atom " + std::to_string(j) + " is zero");
    }
  }
  return Dictionary(std::move(atoms), method, seed, std::move(log));
}

}  // namespace sparseret
