#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sparseret {

// Relevance judgments for one query's ranked list: rel[i] is true when the
// item at rank i+1 shares the query's subject. total_relevant counts every
// relevant gallery item, retrieved or not.
struct JudgedRanking {
  std::string query_id;
  std::vector<bool> rel;
  std::size_t total_relevant = 0;
};

// Rank depth; nullopt means the whole ranked list.
using Cutoff = std::optional<std::size_t>;

std::string cutoff_label(const Cutoff& cutoff);
// Parses "1,5,8,10,all". Cutoffs must be strictly increasing with "all" last.
std::vector<Cutoff> parse_cutoffs(const std::string& text);

// Truncated AP normalization: min(R, n) by default, or n.
enum class ApNormalization { kMinRelevantDepth, kDepth };

double precision_at(const JudgedRanking& r, std::size_t n);
double recall_at(const JudgedRanking& r, std::size_t n);
double average_precision_at(const JudgedRanking& r, const Cutoff& n,
                            ApNormalization norm = ApNormalization::kMinRelevantDepth);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct CurveSeries {
  std::string x_label;
  std::string y_label;
  std::vector<CurvePoint> points;
};

struct EvalReport {
  std::vector<Cutoff> cutoffs;
  std::vector<double> map_at;
  std::vector<double> apr_at;
  std::vector<double> arr_at;
  std::size_t queries = 0;
  // Queries whose subject has no gallery items; excluded from every mean.
  std::vector<std::string> excluded;
  CurveSeries pr_curve;
  CurveSeries cmc_curve;
  ApNormalization ap_normalization = ApNormalization::kMinRelevantDepth;

  nlohmann::ordered_json to_json() const;
};

// MAP/APR/ARR per cutoff, plus PR and CMC curves over the full depth.
EvalReport evaluate(const std::vector<JudgedRanking>& rankings, const std::vector<Cutoff>& cutoffs,
                    ApNormalization norm = ApNormalization::kMinRelevantDepth);

// Point n is (mean recall@n, mean precision@n) for n = 1 .. shortest list length.
CurveSeries pr_curve(const std::vector<JudgedRanking>& rankings);

// Point r is (r, fraction of queries whose first relevant item is at rank <= r).
CurveSeries cmc_curve(const std::vector<JudgedRanking>& rankings, std::size_t max_rank);

// CSV with header `<x_label>,<y_label>`.
void write_curve(const CurveSeries& curve, const std::filesystem::path& path);

}  // namespace sparseret
