#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparseret/coders.hpp"
#include "sparseret/dictionary.hpp"
#include "sparseret/features_io.hpp"
#include "sparseret/metrics.hpp"
#include "sparseret/retrieval.hpp"

namespace sparseret {

// Fully resolved settings for one CLI run.
struct RunConfig {
  std::filesystem::path features;
  FeatureFormat features_format = FeatureFormat::kBinary;
  std::filesystem::path manifest;
  std::filesystem::path out = "out";
  // Inputs of later stages; empty means the file the earlier stage writes in `out`.
  std::filesystem::path dictionary;
  std::filesystem::path ranked;

  SplitPolicy split;
  std::size_t queries_per_subject = 10;
  std::uint64_t seed = 0;
  bool normalize = true;

  DictMethod dict_method = DictMethod::kKmeans;
  DictLearnConfig dict;
  CoderConfig coder = CoderConfig::defaults(CoderMethod::kSsf);
  Similarity similarity = Similarity::kCosine;
  TopN top_n;
  std::vector<Cutoff> cutoffs{1, 5, 8, 10, std::nullopt};
  ApNormalization ap_normalization = ApNormalization::kMinRelevantDepth;
  std::size_t workers = 1;

  std::filesystem::path dictionary_path() const;
  std::filesystem::path ranked_path() const;

  // Every setting with defaults materialized, keyed like the config file.
  nlohmann::ordered_json to_json() const;
};

using Settings = std::map<std::string, std::string>;

// Flat `key = value` lines; `#` starts a comment. Throws InputError on
// malformed lines.
Settings parse_settings(const std::string& text, const std::string& source);
Settings load_settings_file(const std::filesystem::path& path);

// Applies `overrides` over `file` over the defaults. Unknown keys and bad
// values throw InputError.
RunConfig resolve_config(const Settings& file, const Settings& overrides);

// Names accepted by resolve_config.
const std::vector<std::string>& config_keys();

}  // namespace sparseret
