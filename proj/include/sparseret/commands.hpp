#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sparseret/config.hpp"
#include "sparseret/dictionary.hpp"
#include "sparseret/metrics.hpp"
#include "sparseret/retrieval.hpp"

namespace sparseret {

// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

// Each command writes its artifacts under config.out together with run.json
// (the resolved configuration). Errors surface as InputError / NumericError.

// Splits (when a manifest is given), trains on the gallery side and writes
// dictionary.sdic (+ split.csv).
Dictionary cmd_train(const RunConfig& config, std::ostream& log);

// Writes codes.fset: one k-dimensional code per input feature vector.
void cmd_encode(const RunConfig& config, std::ostream& log);

// Ranks every query against the gallery and writes ranked.csv.
std::vector<RankedList> cmd_retrieve(const RunConfig& config, std::ostream& log);

// Scores ranked.csv against the manifest; writes report.json, pr_curve.csv
// and cmc_curve.csv.
EvalReport cmd_evaluate(const RunConfig& config, std::ostream& log);

// train -> retrieve -> evaluate, then artifacts.json with SHA-256 digests.
EvalReport cmd_pipeline(const RunConfig& config, std::ostream& log);

// Judges ranked lists against a split manifest (query subject vs gallery subject).
std::vector<JudgedRanking> judge(const std::vector<RankedList>& lists, const Manifest& manifest,
                                 const DatasetSplit& split);

std::string sha256_hex(const std::filesystem::path& path);

// Runs `body`, mapping InputError to kExitUsage and any other exception to
// kExitRuntime; the message goes to `err`.
int run_guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace sparseret
