#include "sparseret/commands.hpp"

#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <openssl/evp.h>

#include "file_util.hpp"
#include "sparseret/error.hpp"

namespace sparseret {

namespace {

void prepare_out(const RunConfig& config, const std::string& command) {
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) throw InputError("cannot create output directory " + config.out.string() + ": " + ec.message());
  nlohmann::ordered_json run;
  run["command"] = command;
  run["config"] = config.to_json();
  detail::write_file(config.out / "run.json", run.dump(2) + "\n");
}

FeatureSet load_input_features(const RunConfig& config) {
  if (config.features.empty()) throw InputError("no features file given (set 'features')");
  if (!std::filesystem::exists(config.features)) {
    throw InputError("features file " + config.features.string() + " does not exist");
  }
  FeatureSet fs = load_features(config.features, config.features_format);
  return config.normalize ? l2_normalize(fs) : fs;
}

Manifest load_input_manifest(const RunConfig& config) {
  if (config.manifest.empty()) throw InputError("no manifest given (set 'manifest')");
  return load_manifest(config.manifest);
}

std::vector<std::string> subjects_for(const Manifest& manifest, const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(manifest.subject_of(id));
  return out;
}

}  // namespace

Dictionary cmd_train(const RunConfig& config, std::ostream& log) {
  prepare_out(config, "train");
  const FeatureSet fs = load_input_features(config);
  FeatureSet training = fs;
  if (!config.manifest.empty()) {
    const Manifest manifest = load_input_manifest(config);
    manifest.check_against(fs);
    const DatasetSplit split = make_split(manifest, config.queries_per_subject, config.split);
    write_manifest(resolved_manifest(manifest, split), config.out / "split.csv");
    training = fs.select(split.gallery_ids);
  }
  const Dictionary dict = learn_dictionary(training, config.dict_method, config.dict);
  write_dictionary(dict, config.dictionary_path());
  const auto& tl = dict.train_log();
  log << "trained " << to_string(dict.method()) << " dictionary: " << dict.k() << " atoms x "
      << dict.m() << " dims from " << training.count() << " vectors, " << tl.size()
      << " log entries, RMSE " << tl.front() << " -> " << tl.back() << "\n";
  return dict;
}

void cmd_encode(const RunConfig& config, std::ostream& log) {
  prepare_out(config, "encode");
  const FeatureSet fs = load_input_features(config);
  if (!std::filesystem::exists(config.dictionary_path())) {
    throw InputError("dictionary file " + config.dictionary_path().string() + " does not exist");
  }
  const Dictionary dict = load_dictionary(config.dictionary_path());
  const auto codes = encode_batch(dict.atoms(), fs, config.coder, config.workers);
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(dict.k()), static_cast<Eigen::Index>(codes.size()));
  std::size_t unconverged = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    matrix.col(static_cast<Eigen::Index>(i)) = codes[i].coeffs;
    if (!codes[i].converged) ++unconverged;
  }
  write_features(FeatureSet(dict.k(), std::move(matrix), fs.ids()), config.out / "codes.fset",
                 FeatureFormat::kBinary);
  log << "encoded " << codes.size() << " vectors with " << to_string(config.coder.method) << " ("
      << unconverged << " unconverged)\n";
}

std::vector<RankedList> cmd_retrieve(const RunConfig& config, std::ostream& log) {
  prepare_out(config, "retrieve");
  if (!std::filesystem::exists(config.dictionary_path())) {
    throw InputError("dictionary file " + config.dictionary_path().string() + " does not exist");
  }
  const Dictionary dict = load_dictionary(config.dictionary_path());
  const FeatureSet fs = load_input_features(config);
  const Manifest manifest = load_input_manifest(config);
  manifest.check_against(fs);
  const DatasetSplit split = make_split(manifest, config.queries_per_subject, config.split);

  const RetrievalIndex index =
      build_index(fs.select(split.gallery_ids), subjects_for(manifest, split.gallery_ids), dict,
                  config.coder, config.similarity, config.workers);
  const auto lists = batch_query(index, fs.select(split.query_ids), config.top_n, config.workers);
  write_ranked_lists(lists, config.ranked_path());
  std::size_t fallbacks = 0;
  for (const auto& l : lists) fallbacks += l.fallback ? 1 : 0;
  log << "ranked " << lists.size() << " queries against " << index.size() << " gallery items ("
      << fallbacks << " raw-feature fallbacks)\n";
  return lists;
}

std::vector<JudgedRanking> judge(const std::vector<RankedList>& lists, const Manifest& manifest,
                                 const DatasetSplit& split) {
  std::unordered_map<std::string, std::size_t> gallery_per_subject;
  std::unordered_map<std::string, bool> in_gallery;
  for (const auto& id : split.gallery_ids) {
    ++gallery_per_subject[manifest.subject_of(id)];
    in_gallery[id] = true;
  }
  std::vector<JudgedRanking> out;
  out.reserve(lists.size());
  for (const auto& list : lists) {
    const auto* query = manifest.find(list.query_id);
    if (query == nullptr) throw InputError("ranked query '" + list.query_id + "' is not in the manifest");
    JudgedRanking r;
    r.query_id = list.query_id;
    const auto it = gallery_per_subject.find(query->subject);
    r.total_relevant = it == gallery_per_subject.end() ? 0 : it->second;
    for (const auto& e : list.entries) {
      if (!in_gallery.count(e.gallery_id)) {
        throw InputError("ranked item '" + e.gallery_id + "' is not a gallery entry of the manifest");
      }
      r.rel.push_back(manifest.subject_of(e.gallery_id) == query->subject);
    }
    out.push_back(std::move(r));
  }
  return out;
}

EvalReport cmd_evaluate(const RunConfig& config, std::ostream& log) {
  prepare_out(config, "evaluate");
  const Manifest manifest = load_input_manifest(config);
  const DatasetSplit split = make_split(manifest, config.queries_per_subject, config.split);
  const auto lists = load_ranked_lists(config.ranked_path());
  if (lists.empty()) throw InputError("ranked list file " + config.ranked_path().string() + " is empty");

  const EvalReport report = evaluate(judge(lists, manifest, split), config.cutoffs, config.ap_normalization);
  detail::write_file(config.out / "report.json", report.to_json().dump(2) + "\n");
  write_curve(report.pr_curve, config.out / "pr_curve.csv");
  write_curve(report.cmc_curve, config.out / "cmc_curve.csv");

  log << "evaluated " << report.queries << " queries";
  if (!report.excluded.empty()) log << " (" << report.excluded.size() << " excluded: no relevant gallery items)";
  log << "\n";
  for (std::size_t i = 0; i < report.cutoffs.size(); ++i) {
    const auto label = cutoff_label(report.cutoffs[i]);
    log << "  @" << label << ": MAP " << report.map_at[i] << "  APR " << report.apr_at[i] << "  ARR "
        << report.arr_at[i] << "\n";
  }
  return report;
}

EvalReport cmd_pipeline(const RunConfig& config, std::ostream& log) {
  RunConfig stage = config;
  if (stage.manifest.empty()) throw InputError("pipeline needs a manifest");
  cmd_train(stage, log);
  cmd_retrieve(stage, log);
  EvalReport report = cmd_evaluate(stage, log);
  // The last stage overwrote run.json; restore the pipeline's own record.
  prepare_out(stage, "pipeline");

  nlohmann::ordered_json artifacts = nlohmann::ordered_json::object();
  for (const auto& path : {stage.out / "run.json", stage.out / "split.csv", stage.dictionary_path(),
                           stage.ranked_path(), stage.out / "report.json", stage.out / "pr_curve.csv",
                           stage.out / "cmc_curve.csv"}) {
    artifacts[path.filename().string()] = sha256_hex(path);
  }
  detail::write_file(stage.out / "artifacts.json", artifacts.dump(2) + "\n");
  return report;
}

std::string sha256_hex(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

int run_guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace sparseret
