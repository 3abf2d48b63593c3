#include "sparseret/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "file_util.hpp"
#include "sparseret/error.hpp"

namespace sparseret {

namespace {

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw InputError("config '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw InputError("config '" + key + "': expected an unsigned integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw InputError("config '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config '" + key + "': expected true or false, got '" + value + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "features",       "format",         "manifest",      "out",
      "dictionary",     "ranked",         "split",         "queries_per_subject",
      "seed",           "normalize",      "dict_method",   "atoms",
      "dict_iterations", "inner_coder",   "inner_sparsity", "inner_lambda",
      "coder",          "lambda",         "lambda2",       "sparsity",
      "c_factor",       "tol",            "max_iter",      "similarity",
      "top_n",          "cutoffs",        "ap_normalization", "workers"};
  return keys;
}

Settings parse_settings(const std::string& text, const std::string& source) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto view = std::string_view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(source + ":" + std::to_string(number) + ": expected key = value");
    }
    const auto key = std::string(detail::trim(view.substr(0, eq)));
    const auto value = std::string(detail::trim(view.substr(eq + 1)));
    if (key.empty()) throw InputError(source + ":" + std::to_string(number) + ": empty key");
    out[key] = value;
  }
  return out;
}

Settings load_settings_file(const std::filesystem::path& path) {
  return parse_settings(detail::read_file(path), path.string());
}

RunConfig resolve_config(const Settings& file, const Settings& overrides) {
  Settings merged = file;
  for (const auto& [k, v] : overrides) merged[k] = v;
  const auto& keys = config_keys();
  for (const auto& [k, v] : merged) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw InputError("unknown config key '" + k + "'");
    }
  }
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  RunConfig c;
  if (const auto* v = get("features")) c.features = *v;
  if (const auto* v = get("format")) c.features_format = parse_feature_format(*v);
  if (const auto* v = get("manifest")) c.manifest = *v;
  if (const auto* v = get("out")) c.out = *v;
  if (const auto* v = get("dictionary")) c.dictionary = *v;
  if (const auto* v = get("ranked")) c.ranked = *v;
  if (const auto* v = get("seed")) c.seed = parse_u64("seed", *v);
  if (const auto* v = get("split")) {
    if (*v == "first-n") {
      c.split = SplitPolicy::first_n();
    } else if (*v == "random") {
      c.split = SplitPolicy::seeded_random(0);
    } else {
      throw InputError("config 'split': expected first-n or random, got '" + *v + "'");
    }
  }
  c.split.seed = c.seed;
  if (const auto* v = get("queries_per_subject")) c.queries_per_subject = parse_count("queries_per_subject", *v);
  if (const auto* v = get("normalize")) c.normalize = parse_bool("normalize", *v);

  if (const auto* v = get("dict_method")) c.dict_method = parse_dict_method(*v);
  if (const auto* v = get("atoms")) c.dict.k = parse_count("atoms", *v);
  if (const auto* v = get("dict_iterations")) c.dict.iterations = parse_count("dict_iterations", *v);
  c.dict.seed = c.seed;
  if (const auto* v = get("inner_coder")) {
    const auto method = parse_coder_method(*v);
    const auto sparsity = c.dict.inner_coder.sparsity;
    c.dict.inner_coder = CoderConfig::defaults(method);
    c.dict.inner_coder.sparsity = sparsity;
  }
  if (const auto* v = get("inner_sparsity")) c.dict.inner_coder.sparsity = parse_count("inner_sparsity", *v);
  if (const auto* v = get("inner_lambda")) c.dict.inner_coder.lambda = parse_real("inner_lambda", *v);

  if (const auto* v = get("coder")) c.coder = CoderConfig::defaults(parse_coder_method(*v));
  if (const auto* v = get("lambda")) c.coder.lambda = parse_real("lambda", *v);
  if (const auto* v = get("lambda2")) c.coder.lambda2 = parse_real("lambda2", *v);
  if (const auto* v = get("sparsity")) c.coder.sparsity = parse_count("sparsity", *v);
  if (const auto* v = get("c_factor")) c.coder.c_factor = parse_real("c_factor", *v);
  if (const auto* v = get("tol")) c.coder.tol = parse_real("tol", *v);
  if (const auto* v = get("max_iter")) c.coder.max_iter = parse_count("max_iter", *v);
  if (const auto* v = get("similarity")) c.similarity = parse_similarity(*v);
  if (const auto* v = get("top_n")) {
    if (*v == "all") {
      c.top_n.reset();
    } else {
      c.top_n = parse_count("top_n", *v);
      if (*c.top_n == 0) throw InputError("config 'top_n' must be positive or 'all'");
    }
  }
  if (const auto* v = get("cutoffs")) c.cutoffs = parse_cutoffs(*v);
  if (const auto* v = get("ap_normalization")) {
    if (*v == "min") {
      c.ap_normalization = ApNormalization::kMinRelevantDepth;
    } else if (*v == "depth") {
      c.ap_normalization = ApNormalization::kDepth;
    } else {
      throw InputError("config 'ap_normalization': expected min or depth, got '" + *v + "'");
    }
  }
  if (const auto* v = get("workers")) c.workers = parse_count("workers", *v);
  c.dict.workers = c.workers;

  if (c.queries_per_subject == 0) throw InputError("config 'queries_per_subject' must be positive");
  c.coder.validate();
  c.dict.validate();
  return c;
}

std::filesystem::path RunConfig::dictionary_path() const {
  return dictionary.empty() ? out / "dictionary.sdic" : dictionary;
}

std::filesystem::path RunConfig::ranked_path() const {
  return ranked.empty() ? out / "ranked.csv" : ranked;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["features"] = features.string();
  j["format"] = to_string(features_format);
  j["manifest"] = manifest.string();
  j["out"] = out.string();
  j["dictionary"] = dictionary_path().string();
  j["ranked"] = ranked_path().string();
  j["split"] = split.kind == SplitPolicy::Kind::kFirstN ? "first-n" : "random";
  j["queries_per_subject"] = queries_per_subject;
  j["seed"] = seed;
  j["normalize"] = normalize;
  j["dict_method"] = to_string(dict_method);
  j["atoms"] = dict.k;
  j["dict_iterations"] = dict.iterations;
  j["inner_coder"] = to_string(dict.inner_coder.method);
  j["inner_sparsity"] = dict.inner_coder.sparsity;
  j["inner_lambda"] = dict.inner_coder.lambda;
  j["coder"] = to_string(coder.method);
  j["lambda"] = coder.lambda;
  j["lambda2"] = coder.lambda2;
  j["sparsity"] = coder.sparsity;
  j["c_factor"] = coder.c_factor;
  j["tol"] = coder.tol;
  j["max_iter"] = coder.max_iter;
  j["similarity"] = to_string(similarity);
  j["top_n"] = top_n ? std::to_string(*top_n) : "all";
  std::vector<std::string> labels;
  for (const auto& cutoff : cutoffs) labels.push_back(cutoff_label(cutoff));
  j["cutoffs"] = labels;
  j["ap_normalization"] = ap_normalization == ApNormalization::kMinRelevantDepth ? "min" : "depth";
  j["workers"] = workers;
  return j;
}

}  // namespace sparseret
