#pragma once
#include "apiforge/pool.hpp"
#include "apiforge/retrieval.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace apiforge::analytics {

struct CurvePoint {
    int step = 0;
    long size = 0;

    bool operator==(const CurvePoint&) const = default;
};

// For each threshold t: the number of APIs whose cumulative calls through
// step s reach t, for s = 0 (seed state) through the last recorded step.
// Counts are recomputed from the stored demonstration program texts.
std::map<long, std::vector<CurvePoint>>
pool_size_curve(const std::vector<pool::InductionRecord>& records,
                const std::vector<pool::DemoEntry>& demos, const std::vector<long>& thresholds);

struct RatioPoint {
    int step = 0;
    double value = 0.0;
};

struct RatioSeries {
    std::vector<RatioPoint> raw;              // steps with unique > 0 only
    std::vector<RatioPoint> moving_average;   // look-ahead window over raw
};

// Raw ratio at step s = |new_apis| / unique_apis_evoked; steps with zero
// unique APIs are excluded. The moving average at s is the mean of the
// defined raw ratios over [s, s+window-1].
RatioSeries induction_ratio_series(const std::vector<pool::InductionRecord>& records,
                                   int window = 50);

// All pool APIs ordered by descending total_calls, name tiebreak, truncated
// to top_n rows.
std::vector<std::pair<std::string, long>> frequency_table(const pool::PoolState& state,
                                                          size_t top_n);

struct CoverageRow {
    std::string api;
    long total_calls = 0;
    bool covered = false;
};

struct CoverageReport {
    long covered = 0;
    long total = 0;
    std::vector<CoverageRow> rows;
};

// Two-column text: api name then a covered flag; '#' comment lines allowed.
std::map<std::string, bool> load_coverage_mapping(const std::string& path);

// APIs absent from the mapping count as uncovered.
CoverageReport coverage_compare(const std::vector<std::pair<std::string, long>>& table,
                                const std::map<std::string, bool>& mapping);

// ------------------------------------------------------------- human eval

struct RedundancyAnnotation {
    std::string api_name;
    double score = 0.0;              // 0, 0.5, or 1
    std::set<std::string> tags;      // "complex" / "synonym", only when 0.5
};

struct FaithfulnessAnnotation {
    std::string tutorial_id;
    int step = 0;
    double score = 0.0;              // 0, 0.5, or 1
};

struct RankingAnnotation {
    std::string tutorial_id;
    int step = 0;
    std::map<std::string, double> ranks;   // variant name -> rank (ties share means)
};

struct AnnotationSet {
    std::map<std::string, std::vector<RedundancyAnnotation>> redundancy_by_variant;
    std::map<std::string, std::vector<FaithfulnessAnnotation>> faithfulness_by_variant;
    std::vector<RankingAnnotation> rankings;
};

// Line-delimited annotation records; the "type" field selects the kind.
AnnotationSet load_annotations(const std::vector<std::string>& paths);
void append_annotation_line(const std::string& path, const std::string& json_line);

struct ReportRow {
    std::string variant;
    double redundancy_score = 0.0;           // 100 x mean
    double minus_complex = 0.0;              // complex-tagged 0.5 rescored to 0
    double minus_complex_synonym = 0.0;      // additionally synonym-tagged
    double faithfulness_score = 0.0;         // 100 x mean
    double mean_rank = 0.0;
    double avg_new_apis = 0.0;               // induced new APIs per tutorial
};

// Column labels of the rendered report, in order.
std::vector<std::string> report_header();

// Validates scores/tags/rank structure; throws Error("InvalidScore") or
// Error("InconsistentRanking").
std::vector<ReportRow>
human_eval_report(const AnnotationSet& annotations,
                  const std::map<std::string, std::vector<pool::InductionRecord>>&
                      records_by_variant);

std::string render_report(const std::vector<ReportRow>& rows);
std::string report_to_csv(const std::vector<ReportRow>& rows);

// ------------------------------------------------------------- exports

enum class ExportFormat { Csv, Svg };
ExportFormat format_from_name(const std::string& name);   // throws UnsupportedFormat

std::string curve_to_csv(const std::vector<CurvePoint>& curve);
std::string ratio_series_to_csv(const RatioSeries& series, int last_step);
std::string frequency_to_csv(const std::vector<std::pair<std::string, long>>& table);

// Horizontal bars, lengths proportional to log10 of the call count.
std::string frequency_to_svg(const std::vector<std::pair<std::string, long>>& table);

// One row per pool API: the embedding of its name, for external projection
// tools. Columns: api,c0..c{D-1}.
std::string api_embeddings_csv(const pool::PoolState& state, retrieval::Embedder& embedder);

} // namespace apiforge::analytics
