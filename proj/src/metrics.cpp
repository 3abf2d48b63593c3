#include "sparseret/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "file_util.hpp"
#include "sparseret/error.hpp"

namespace sparseret {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

std::size_t hits_in_prefix(const JudgedRanking& r, std::size_t n) {
  return static_cast<std::size_t>(std::count(r.rel.begin(), r.rel.begin() + static_cast<std::ptrdiff_t>(n), true));
}

void check_depth(const JudgedRanking& r, std::size_t n) {
  if (n < 1 || n > r.rel.size()) {
    throw InputError("rank depth " + std::to_string(n) + " out of range for query '" + r.query_id +
                     "' with " + std::to_string(r.rel.size()) + " ranked items");
  }
}

std::vector<const JudgedRanking*> scorable(const std::vector<JudgedRanking>& rankings,
                                           std::vector<std::string>* excluded) {
  if (rankings.empty()) throw InputError("no rankings to evaluate");
  std::vector<const JudgedRanking*> kept;
  for (const auto& r : rankings) {
    const auto hits = static_cast<std::size_t>(std::count(r.rel.begin(), r.rel.end(), true));
    if (hits > r.total_relevant) {
      throw InputError("query '" + r.query_id + "' has more relevant hits than total_relevant");
    }
    if (r.total_relevant == 0) {
      if (excluded != nullptr) excluded->push_back(r.query_id);
      continue;
    }
    kept.push_back(&r);
  }
  if (kept.empty()) throw InputError("every query lacks relevant gallery items");
  return kept;
}

}  // namespace

std::string cutoff_label(const Cutoff& cutoff) {
  return cutoff ? std::to_string(*cutoff) : "all";
}

std::vector<Cutoff> parse_cutoffs(const std::string& text) {
  std::vector<Cutoff> out;
  for (const auto field : detail::split_fields(text)) {
    const auto token = detail::trim(field);
    if (token == "all") {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::size_t value = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || value == 0) {
      throw InputError("invalid cutoff '" + std::string(token) + "'");
    }
    out.emplace_back(value);
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!out[i - 1] || (out[i] && *out[i] <= *out[i - 1])) {
      throw InputError("cutoffs must be strictly increasing with 'all' last: " + text);
    }
  }
  if (out.empty()) throw InputError("no cutoffs given");
  return out;
}

double precision_at(const JudgedRanking& r, std::size_t n) {
  check_depth(r, n);
  return static_cast<double>(hits_in_prefix(r, n)) / static_cast<double>(n);
}

double recall_at(const JudgedRanking& r, std::size_t n) {
  check_depth(r, n);
  if (r.total_relevant == 0) throw InputError("query '" + r.query_id + "' has no relevant items");
  return static_cast<double>(hits_in_prefix(r, n)) / static_cast<double>(r.total_relevant);
}

double average_precision_at(const JudgedRanking& r, const Cutoff& n, ApNormalization norm) {
  if (r.total_relevant == 0) throw InputError("query '" + r.query_id + "' has no relevant items");
  if (n && *n == 0) throw InputError("AP depth must be >= 1");
  const std::size_t depth = n ? std::min(*n, r.rel.size()) : r.rel.size();
  CompensatedSum sum;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (!r.rel[i]) continue;
    ++hits;
    sum.add(static_cast<double>(hits) / static_cast<double>(i + 1));
  }
  double denom = static_cast<double>(r.total_relevant);
  if (n) {
    denom = norm == ApNormalization::kDepth ? static_cast<double>(*n)
                                            : static_cast<double>(std::min(r.total_relevant, *n));
  }
  return sum.value() / denom;
}

EvalReport evaluate(const std::vector<JudgedRanking>& rankings, const std::vector<Cutoff>& cutoffs,
                    ApNormalization norm) {
  if (cutoffs.empty()) throw InputError("no cutoffs given");
  EvalReport report;
  report.cutoffs = cutoffs;
  report.ap_normalization = norm;
  const auto kept = scorable(rankings, &report.excluded);
  report.queries = kept.size();

  std::size_t shortest = kept.front()->rel.size();
  for (const auto* r : kept) shortest = std::min(shortest, r->rel.size());
  if (shortest == 0) throw InputError("a query has an empty ranked list");

  const double count = static_cast<double>(kept.size());
  for (const auto& cutoff : cutoffs) {
    CompensatedSum map;
    CompensatedSum apr;
    CompensatedSum arr;
    for (const auto* r : kept) {
      const std::size_t depth = cutoff ? *cutoff : r->rel.size();
      map.add(average_precision_at(*r, cutoff, norm));
      apr.add(precision_at(*r, depth));
      arr.add(recall_at(*r, depth));
    }
    report.map_at.push_back(map.value() / count);
    report.apr_at.push_back(apr.value() / count);
    report.arr_at.push_back(arr.value() / count);
  }
  report.pr_curve = pr_curve(rankings);
  report.cmc_curve = cmc_curve(rankings, shortest);
  return report;
}

CurveSeries pr_curve(const std::vector<JudgedRanking>& rankings) {
  const auto kept = scorable(rankings, nullptr);
  std::size_t depth = kept.front()->rel.size();
  for (const auto* r : kept) depth = std::min(depth, r->rel.size());

  CurveSeries curve{"recall", "precision", {}};
  const double count = static_cast<double>(kept.size());
  for (std::size_t n = 1; n <= depth; ++n) {
    CompensatedSum recall;
    CompensatedSum precision;
    for (const auto* r : kept) {
      recall.add(recall_at(*r, n));
      precision.add(precision_at(*r, n));
    }
    curve.points.push_back({recall.value() / count, precision.value() / count});
  }
  return curve;
}

CurveSeries cmc_curve(const std::vector<JudgedRanking>& rankings, std::size_t max_rank) {
  if (max_rank < 1) throw InputError("max_rank must be >= 1");
  const auto kept = scorable(rankings, nullptr);
  // hits_by_rank[r] = queries whose first relevant item sits at rank r + 1.
  std::vector<std::size_t> hits_by_rank(max_rank, 0);
  for (const auto* r : kept) {
    const auto first = std::find(r->rel.begin(), r->rel.end(), true);
    const auto pos = static_cast<std::size_t>(first - r->rel.begin());
    if (first != r->rel.end() && pos < max_rank) ++hits_by_rank[pos];
  }
  CurveSeries curve{"rank", "retrieval_rate", {}};
  std::size_t cumulative = 0;
  for (std::size_t rank = 1; rank <= max_rank; ++rank) {
    cumulative += hits_by_rank[rank - 1];
    curve.points.push_back(
        {static_cast<double>(rank), static_cast<double>(cumulative) / static_cast<double>(kept.size())});
  }
  return curve;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["queries"] = queries;
  j["excluded_queries"] = excluded;
  j["warnings"] = excluded.size();
  j["ap_normalization"] =
      ap_normalization == ApNormalization::kMinRelevantDepth ? "min_relevant_depth" : "depth";
  std::vector<std::string> labels;
  for (const auto& c : cutoffs) labels.push_back(cutoff_label(c));
  j["cutoffs"] = labels;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < cutoffs.size(); ++i) metrics["MAP@" + labels[i]] = map_at[i];
  for (std::size_t i = 0; i < cutoffs.size(); ++i) metrics["APR@" + labels[i]] = apr_at[i];
  for (std::size_t i = 0; i < cutoffs.size(); ++i) metrics["ARR@" + labels[i]] = arr_at[i];
  j["metrics"] = metrics;
  j["pr_curve_points"] = pr_curve.points.size();
  j["cmc_curve_points"] = cmc_curve.points.size();
  return j;
}

void write_curve(const CurveSeries& curve, const std::filesystem::path& path) {
  std::string out = curve.x_label + ',' + curve.y_label + '\n';
  for (const auto& p : curve.points) {
    out += detail::format_double(p.x) + ',' + detail::format_double(p.y) + '\n';
  }
  detail::write_file(path, out);
}

}  // namespace sparseret
