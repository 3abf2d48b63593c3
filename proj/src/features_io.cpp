#include "sparseret/features_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "file_util.hpp"
#include "sparseret/error.hpp"

namespace sparseret {

static_assert(std::endian::native == std::endian::little,
              "feature files are read and written assuming a little-endian host");

using detail::read_file;
using detail::split_fields;
using detail::strip_cr;
using detail::write_file;

namespace {

constexpr char kMagic[4] = {'F', 'S', 'E', 'T'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void append_le(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_le(const unsigned char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

FeatureSet parse_binary(const std::string& bytes, const std::string& name) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  constexpr std::size_t kHeader = 4 + 1 + 4 + 8;
  if (size < kHeader || std::memcmp(p, kMagic, 4) != 0) {
    throw InputError(name + ": malformed header (missing FSET magic)");
  }
  if (p[4] != kVersion) {
    throw InputError(name + ": unsupported FSET version " + std::to_string(p[4]));
  }
  const auto dim = read_le<std::uint32_t>(p + 5);
  const auto count = read_le<std::uint64_t>(p + 9);
  if (dim == 0) throw InputError(name + ": malformed header (dim = 0)");
  const std::size_t payload = (size - kHeader) / 4;
  if (count > payload / dim) {
    throw InputError(name + ": truncated payload (header claims " + std::to_string(count) +
                     " vectors of dim " + std::to_string(dim) + ")");
  }
  std::size_t offset = kHeader;
  Eigen::MatrixXd data(dim, static_cast<Eigen::Index>(count));
  for (std::uint64_t j = 0; j < count; ++j) {
    for (std::uint32_t i = 0; i < dim; ++i) {
      data(i, static_cast<Eigen::Index>(j)) = read_f32_le(p + offset);
      offset += 4;
    }
  }
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    if (offset + 2 > size) throw InputError(name + ": truncated id table");
    const auto len = read_le<std::uint16_t>(p + offset);
    offset += 2;
    if (offset + len > size) throw InputError(name + ": truncated id table");
    ids.emplace_back(bytes.data() + offset, len);
    offset += len;
  }
  if (offset != size) throw InputError(name + ": trailing bytes after id table");
  return FeatureSet(dim, std::move(data), std::move(ids));
}

std::string serialize_binary(const FeatureSet& fs) {
  if (fs.dim() > UINT32_MAX) throw InputError("dim does not fit the FSET header");
  std::string out;
  out.reserve(17 + fs.count() * (fs.dim() * 4 + 16));
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(fs.dim()));
  append_le<std::uint64_t>(out, fs.count());
  const auto& m = fs.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) append_f32_le(out, static_cast<float>(m(i, j)));
  }
  for (const auto& id : fs.ids()) {
    if (id.size() > UINT16_MAX) throw InputError("id too long for FSET: " + id.substr(0, 32));
    append_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
  }
  return out;
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  // from_chars rejects a leading '+'.
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw InputError(where + ": cannot parse value '" + std::string(text) + "'");
  }
  return value;
}

FeatureSet parse_csv(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(name + ": malformed header (empty file)");
  const auto header = split_fields(strip_cr(line));
  if (header.size() < 2 || header[0] != "id") {
    throw InputError(name + ": malformed header (expected id,f0,...)");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto stripped = strip_cr(line);
    if (stripped.empty()) continue;
    const auto fields = split_fields(stripped);
    if (fields.size() != dim + 1) {
      throw InputError(name + ": inconsistent row " + std::to_string(row) + " (id '" +
                       std::string(fields[0]) + "') has " + std::to_string(fields.size() - 1) +
                       " values, expected " + std::to_string(dim));
    }
    ids.emplace_back(fields[0]);
    const std::string where = name + " row " + std::to_string(row);
    for (std::size_t i = 1; i < fields.size(); ++i) values.push_back(parse_double(fields[i], where));
  }
  Eigen::MatrixXd data =
      Eigen::Map<Eigen::MatrixXd>(values.data(), static_cast<Eigen::Index>(dim),
                                  static_cast<Eigen::Index>(ids.size()));
  return FeatureSet(dim, std::move(data), std::move(ids));
}

std::string serialize_csv(const FeatureSet& fs) {
  std::string out = "id";
  for (std::size_t i = 0; i < fs.dim(); ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (std::size_t j = 0; j < fs.count(); ++j) {
    const auto& id = fs.id(j);
    if (id.find_first_of(",\r\n") != std::string::npos) {
      throw InputError("id '" + id + "' cannot be written to CSV");
    }
    out += id;
    const auto v = fs.vector(j);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out += ',';
      out += detail::format_double(v(i));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

namespace detail {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace detail

void append_f32_le(std::string& out, float value) { append_le<float>(out, value); }

float read_f32_le(const unsigned char* p) { return read_le<float>(p); }

FeatureFormat parse_feature_format(const std::string& name) {
  if (name == "binary" || name == "fset") return FeatureFormat::kBinary;
  if (name == "csv") return FeatureFormat::kCsv;
  throw InputError("unknown feature format '" + name + "' (expected binary or csv)");
}

std::string to_string(FeatureFormat format) {
  return format == FeatureFormat::kBinary ? "binary" : "csv";
}

FeatureSet::FeatureSet(std::size_t dim, Eigen::MatrixXd data, std::vector<std::string> ids)
    : dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
  if (dim_ == 0) throw InputError("feature dim must be positive");
  if (static_cast<std::size_t>(data_.rows()) != dim_ && data_.cols() > 0) {
    throw InputError("feature data has " + std::to_string(data_.rows()) + " rows, expected " +
                     std::to_string(dim_));
  }
  if (data_.cols() == 0) data_.resize(static_cast<Eigen::Index>(dim_), 0);
  if (static_cast<std::size_t>(data_.cols()) != ids_.size()) {
    throw InputError("feature count " + std::to_string(data_.cols()) + " does not match " +
                     std::to_string(ids_.size()) + " ids");
  }
  index_.reserve(ids_.size());
  for (std::size_t j = 0; j < ids_.size(); ++j) {
    if (!index_.emplace(ids_[j], j).second) throw InputError("duplicate feature id '" + ids_[j] + "'");
    if (!data_.col(static_cast<Eigen::Index>(j)).allFinite()) {
      throw InputError("non-finite value in feature vector '" + ids_[j] + "'");
    }
  }
}

FeatureSet FeatureSet::empty(std::size_t dim) {
  return FeatureSet(dim, Eigen::MatrixXd(static_cast<Eigen::Index>(dim), 0), {});
}

std::optional<std::size_t> FeatureSet::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureSet FeatureSet::select(const std::vector<std::string>& ids) const {
  Eigen::MatrixXd data(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const auto idx = index_of(ids[j]);
    if (!idx) throw InputError("id '" + ids[j] + "' not present in feature set");
    data.col(static_cast<Eigen::Index>(j)) = data_.col(static_cast<Eigen::Index>(*idx));
  }
  return FeatureSet(dim_, std::move(data), ids);
}

bool operator==(const FeatureSet& a, const FeatureSet& b) {
  return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_.cols() == b.data_.cols() &&
         (a.data_.array() == b.data_.array()).all();
}

FeatureSet load_features(const std::filesystem::path& path, FeatureFormat format) {
  const std::string bytes = read_file(path);
  return format == FeatureFormat::kBinary ? parse_binary(bytes, path.string())
                                          : parse_csv(bytes, path.string());
}

void write_features(const FeatureSet& fs, const std::filesystem::path& path,
                    FeatureFormat format) {
  write_file(path, format == FeatureFormat::kBinary ? serialize_binary(fs) : serialize_csv(fs));
}

FeatureSet l2_normalize(const FeatureSet& fs) {
  Eigen::MatrixXd data = fs.matrix();
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double norm = data.col(j).norm();
    if (norm == 0.0) {
      throw InputError("cannot normalize zero vector '" + fs.id(static_cast<std::size_t>(j)) + "'");
    }
    // Already-unit vectors are left untouched so normalization is idempotent.
    if (std::abs(norm - 1.0) > 4 * std::numeric_limits<double>::epsilon()) data.col(j) /= norm;
  }
  return FeatureSet(fs.dim(), std::move(data), fs.ids());
}

}  // namespace sparseret
