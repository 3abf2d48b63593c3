#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sparseret {

enum class FeatureFormat { kBinary, kCsv };

FeatureFormat parse_feature_format(const std::string& name);
std::string to_string(FeatureFormat format);

// A set of equally sized real vectors, each tagged with a unique id.
// Vectors are stored as the columns of a dim x count matrix. Immutable after
// construction; the constructor enforces finiteness and id uniqueness.
class FeatureSet {
 public:
  FeatureSet(std::size_t dim, Eigen::MatrixXd data, std::vector<std::string> ids);

  static FeatureSet empty(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return ids_.size(); }

  const Eigen::MatrixXd& matrix() const { return data_; }
  auto vector(std::size_t i) const { return data_.col(static_cast<Eigen::Index>(i)); }

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  // Columns in the given id order.
  FeatureSet select(const std::vector<std::string>& ids) const;

  friend bool operator==(const FeatureSet& a, const FeatureSet& b);

 private:
  std::size_t dim_;
  Eigen::MatrixXd data_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout ("FSET" v1): magic, u8 version, u32 dim, u64 count, count*dim
// float32 values (vector-contiguous), then per vector a u16 byte length and
// the UTF-8 id. All integers and floats little-endian. Values are narrowed to
// float32, so binary round trips are exact for float-representable sets.
//
// CSV layout: header `id,f0,...,f{dim-1}`, then one `id,v0,...` row per vector.
FeatureSet load_features(const std::filesystem::path& path, FeatureFormat format);
void write_features(const FeatureSet& fs, const std::filesystem::path& path,
                    FeatureFormat format);

// Raw binary payload helpers shared with the dictionary file.
void append_f32_le(std::string& out, float value);
float read_f32_le(const unsigned char* p);

FeatureSet l2_normalize(const FeatureSet& fs);

enum class Role { kQuery, kGallery, kAuto };

Role parse_role(const std::string& text);
std::string to_string(Role role);

struct ManifestEntry {
  std::string id;
  std::string subject;
  Role role = Role::kAuto;
};

// Id -> subject assignment with optional fixed query/gallery roles.
class Manifest {
 public:
  explicit Manifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const ManifestEntry* find(const std::string& id) const;
  const std::string& subject_of(const std::string& id) const;

  // Throws InputError naming the first id absent from `fs`.
  void check_against(const FeatureSet& fs) const;

 private:
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// CSV with header `id,subject,role`; the role column is optional.
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitPolicy {
  enum class Kind { kFirstN, kSeededRandom };
  Kind kind = Kind::kFirstN;
  std::uint64_t seed = 0;

  static SplitPolicy first_n() { return {}; }
  static SplitPolicy seeded_random(std::uint64_t seed) { return {Kind::kSeededRandom, seed}; }
};

struct DatasetSplit {
  std::vector<std::string> query_ids;
  std::vector<std::string> gallery_ids;
};

// Picks `queries_per_subject` queries per subject. Entries with an explicit
// role keep it; `auto` entries fill the remaining query slots (lexicographic
// id order, or a seeded shuffle) and the rest go to the gallery. Both lists
// preserve manifest order.
DatasetSplit make_split(const Manifest& manifest, std::size_t queries_per_subject,
                        const SplitPolicy& policy);

// The manifest with every role resolved to the given split.
Manifest resolved_manifest(const Manifest& manifest, const DatasetSplit& split);

}  // namespace sparseret
