#include <algorithm>
#include <map>
#include <sstream>

#include "file_util.hpp"
#include "sparseret/error.hpp"
#include "sparseret/features_io.hpp"
#include "sparseret/random.hpp"

namespace sparseret {

Role parse_role(const std::string& text) {
  if (text == "query") return Role::kQuery;
  if (text == "gallery") return Role::kGallery;
  if (text.empty() || text == "auto") return Role::kAuto;
  throw InputError("unknown manifest role '" + text + "' (expected query, gallery or auto)");
}

std::string to_string(Role role) {
  switch (role) {
    case Role::kQuery:
      return "query";
    case Role::kGallery:
      return "gallery";
    case Role::kAuto:
      break;
  }
  return "auto";
}

Manifest::Manifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id.empty()) throw InputError("manifest entry " + std::to_string(i + 1) + " has an empty id");
    if (e.subject.empty()) throw InputError("manifest entry '" + e.id + "' has an empty subject");
    if (!index_.emplace(e.id, i).second) throw InputError("duplicate manifest id '" + e.id + "'");
  }
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const std::string& Manifest::subject_of(const std::string& id) const {
  const auto* e = find(id);
  if (e == nullptr) throw InputError("id '" + id + "' is not in the manifest");
  return e->subject;
}

void Manifest::check_against(const FeatureSet& fs) const {
  for (const auto& e : entries_) {
    if (!fs.index_of(e.id)) throw InputError("manifest id '" + e.id + "' has no feature vector");
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;
  const std::string name = path.string();
  if (!std::getline(in, line)) throw InputError(name + ": empty manifest");
  const auto header = detail::split_fields(detail::strip_cr(line));
  const bool has_role = header.size() == 3 && header[2] == "role";
  if (header.size() < 2 || header[0] != "id" || header[1] != "subject" ||
      (header.size() == 3 && !has_role) || header.size() > 3) {
    throw InputError(name + ": manifest header must be id,subject[,role]");
  }
  std::vector<ManifestEntry> entries;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto stripped = detail::strip_cr(line);
    if (stripped.empty()) continue;
    const auto fields = detail::split_fields(stripped);
    if (fields.size() < 2 || fields.size() > header.size()) {
      throw InputError(name + ": malformed manifest row " + std::to_string(row));
    }
    ManifestEntry e;
    e.id = std::string(fields[0]);
    e.subject = std::string(fields[1]);
    if (fields.size() == 3) e.role = parse_role(std::string(detail::trim(fields[2])));
    entries.push_back(std::move(e));
  }
  return Manifest(std::move(entries));
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::string out = "id,subject,role\n";
  for (const auto& e : manifest.entries()) out += e.id + ',' + e.subject + ',' + to_string(e.role) + '\n';
  detail::write_file(path, out);
}

DatasetSplit make_split(const Manifest& manifest, std::size_t queries_per_subject,
                        const SplitPolicy& policy) {
  if (queries_per_subject == 0) throw InputError("queries_per_subject must be positive");

  // Subjects in order of first appearance, each with its entry indices.
  std::vector<std::string> subjects;
  std::map<std::string, std::vector<std::size_t>> members;
  const auto& entries = manifest.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto [it, inserted] = members.try_emplace(entries[i].subject);
    if (inserted) subjects.push_back(entries[i].subject);
    it->second.push_back(i);
  }

  std::vector<bool> is_query(entries.size(), false);
  std::vector<std::string> problems;
  Rng rng(policy.seed);
  for (const auto& subject : subjects) {
    const auto& idx = members[subject];
    std::size_t fixed_queries = 0;
    std::vector<std::size_t> candidates;
    for (auto i : idx) {
      switch (entries[i].role) {
        case Role::kQuery:
          ++fixed_queries;
          is_query[i] = true;
          break;
        case Role::kGallery:
          break;
        case Role::kAuto:
          candidates.push_back(i);
          break;
      }
    }
    if (idx.size() <= queries_per_subject || fixed_queries > queries_per_subject ||
        fixed_queries + candidates.size() < queries_per_subject) {
      problems.push_back(subject + " (" + std::to_string(idx.size()) + " entries)");
      continue;
    }
    const std::size_t needed = queries_per_subject - fixed_queries;
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) { return entries[a].id < entries[b].id; });
    if (policy.kind == SplitPolicy::Kind::kSeededRandom) {
      for (std::size_t i = candidates.size(); i > 1; --i) {
        std::swap(candidates[i - 1], candidates[uniform_index(rng, i)]);
      }
    }
    for (std::size_t q = 0; q < needed; ++q) is_query[candidates[q]] = true;
  }
  if (!problems.empty()) {
    std::string msg = "cannot take " + std::to_string(queries_per_subject) +
                      " queries per subject and keep a non-empty gallery for: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? ", " : "") + problems[i];
    throw InputError(msg);
  }

  DatasetSplit split;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (is_query[i] ? split.query_ids : split.gallery_ids).push_back(entries[i].id);
  }
  return split;
}

Manifest resolved_manifest(const Manifest& manifest, const DatasetSplit& split) {
  std::vector<ManifestEntry> entries = manifest.entries();
  std::unordered_map<std::string, Role> roles;
  for (const auto& id : split.query_ids) roles[id] = Role::kQuery;
  for (const auto& id : split.gallery_ids) roles[id] = Role::kGallery;
  for (auto& e : entries) {
    const auto it = roles.find(e.id);
    if (it == roles.end()) throw InputError("split does not cover manifest id '" + e.id + "'");
    e.role = it->second;
  }
  return Manifest(std::move(entries));
}

}  // namespace sparseret
