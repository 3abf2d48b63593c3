// Command-line front end: train, encode, retrieve, evaluate, pipeline.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparseret/commands.hpp"
#include "sparseret/config.hpp"
#include "sparseret/error.hpp"

namespace {

struct Options {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;
};

// Adds `--flag VALUE` writing into overrides[key].
void add_override(CLI::App* cmd, Options& opts, const std::string& flag, const std::string& key,
                  const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.overrides[key] = v; }, help);
}

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config_file, "Flat key = value config file");
  add_override(cmd, opts, "--features", "features", "Feature file");
  add_override(cmd, opts, "--format", "format", "Feature file format: binary or csv");
  add_override(cmd, opts, "--manifest", "manifest", "Manifest CSV (id,subject[,role])");
  add_override(cmd, opts, "--out", "out", "Output directory");
  add_override(cmd, opts, "--dictionary", "dictionary", "Dictionary file (default OUT/dictionary.sdic)");
  add_override(cmd, opts, "--ranked", "ranked", "Ranked-list CSV (default OUT/ranked.csv)");
  add_override(cmd, opts, "--seed", "seed", "Seed for splits and dictionary learning");
  add_override(cmd, opts, "--split", "split", "Query selection: first-n or random");
  add_override(cmd, opts, "--queries-per-subject", "queries_per_subject", "Queries per subject");
  add_override(cmd, opts, "--coder", "coder", "homotopy, lasso, elastic-net, ssf or omp");
  add_override(cmd, opts, "--lambda", "lambda", "l1 weight");
  add_override(cmd, opts, "--dict-method", "dict_method", "kmeans or ksvd");
  add_override(cmd, opts, "--atoms", "atoms", "Dictionary size k");
  add_override(cmd, opts, "--top-n", "top_n", "Ranked list length or 'all'");
  add_override(cmd, opts, "--cutoffs", "cutoffs", "Evaluation cutoffs, e.g. 1,5,8,10,all");
  add_override(cmd, opts, "--workers", "workers", "Worker threads (0 = all cores)");
  cmd->add_option("--set", opts.sets, "Any config key as key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sparseret;
  CLI::App app{"Sparse-code retrieval engine over deep feature vectors"};
  app.require_subcommand(1);
  Options opts;
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"train", "Learn a dictionary from the gallery side of the split"},
           {"encode", "Sparse-code every feature vector over a dictionary"},
           {"retrieve", "Rank gallery items for every query"},
           {"evaluate", "Compute MAP/APR/ARR, PR and CMC from ranked lists"},
           {"pipeline", "Run train, retrieve and evaluate end to end"}}) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, opts);
    commands[name] = cmd;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  return run_guarded(
      [&] {
        for (const auto& kv : opts.sets) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
          opts.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        const Settings file = opts.config_file.empty() ? Settings{} : load_settings_file(opts.config_file);
        const RunConfig config = resolve_config(file, opts.overrides);
        if (commands["train"]->parsed()) cmd_train(config, std::cout);
        if (commands["encode"]->parsed()) cmd_encode(config, std::cout);
        if (commands["retrieve"]->parsed()) cmd_retrieve(config, std::cout);
        if (commands["evaluate"]->parsed()) cmd_evaluate(config, std::cout);
        if (commands["pipeline"]->parsed()) cmd_pipeline(config, std::cout);
      },
      std::cerr);
}
