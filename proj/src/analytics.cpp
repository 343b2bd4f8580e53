#include "apiforge/analytics.hpp"
#include "apiforge/agentlang.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace apiforge::analytics {

namespace {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

void check_sequential(const std::vector<pool::InductionRecord>& records) {
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].step != static_cast<int>(i) + 1)
            throw Error("MalformedRecord", "induction records must be strictly ordered "
                                           "by step with no gaps");
}

} // namespace

std::map<long, std::vector<CurvePoint>>
pool_size_curve(const std::vector<pool::InductionRecord>& records,
                const std::vector<pool::DemoEntry>& demos, const std::vector<long>& thresholds) {
    check_sequential(records);
    int last_step = records.empty() ? 0 : records.back().step;

    // Per-step per-API call counts come from the stored program texts, the
    // same accounting the pool uses.
    std::map<int, std::map<std::string, long>> calls_at_step;
    for (const auto& demo : demos) {
        auto program = agentlang::parse(demo.program_text);
        for (const auto& call : agentlang::extract_calls(program))
            calls_at_step[demo.step_added][call.callee] += 1;
    }

    std::map<long, std::vector<CurvePoint>> curves;
    for (long threshold : thresholds) {
        if (threshold < 1) throw Error("InvalidThreshold", "thresholds must be >= 1");
        curves[threshold] = {};
    }

    std::map<std::string, long> cumulative;
    for (int step = 0; step <= last_step; ++step) {
        if (auto it = calls_at_step.find(step); it != calls_at_step.end())
            for (const auto& [api, count] : it->second) cumulative[api] += count;
        for (long threshold : thresholds) {
            long size = 0;
            for (const auto& [api, count] : cumulative)
                if (count >= threshold) ++size;
            curves[threshold].push_back({step, size});
        }
    }
    return curves;
}

RatioSeries induction_ratio_series(const std::vector<pool::InductionRecord>& records,
                                   int window) {
    if (window < 1) throw Error("InvalidArgument", "window must be >= 1");
    check_sequential(records);

    RatioSeries series;
    std::map<int, double> raw_by_step;
    for (const auto& record : records) {
        if (record.unique_apis_evoked <= 0) continue;   // ratio undefined
        double ratio = static_cast<double>(record.new_apis.size()) /
                       static_cast<double>(record.unique_apis_evoked);
        raw_by_step[record.step] = ratio;
        series.raw.push_back({record.step, ratio});
    }

    int last_step = records.empty() ? 0 : records.back().step;
    for (int step = 1; step <= last_step; ++step) {
        double sum = 0.0;
        int defined = 0;
        for (int s = step; s < step + window; ++s) {
            if (auto it = raw_by_step.find(s); it != raw_by_step.end()) {
                sum += it->second;
                ++defined;
            }
        }
        if (defined > 0) series.moving_average.push_back({step, sum / defined});
    }
    return series;
}

std::vector<std::pair<std::string, long>> frequency_table(const pool::PoolState& state,
                                                          size_t top_n) {
    std::vector<std::pair<std::string, long>> table;
    table.reserve(state.apis.size());
    for (const auto& [name, entry] : state.apis) table.emplace_back(name, entry.total_calls);
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (table.size() > top_n) table.resize(top_n);
    return table;
}

std::map<std::string, bool> load_coverage_mapping(const std::string& path) {
    std::map<std::string, bool> mapping;
    auto lines = split_lines(read_file(path));
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string line = trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        size_t space = line.find_first_of(" \t");
        if (space == std::string::npos)
            throw Error("MalformedRecord", path + " line " + std::to_string(i + 1) +
                                               ": expected '<api> <flag>'");
        std::string api = trim(line.substr(0, space));
        std::string flag = to_lower(trim(line.substr(space + 1)));
        bool covered;
        if (flag == "1" || flag == "true" || flag == "yes") covered = true;
        else if (flag == "0" || flag == "false" || flag == "no") covered = false;
        else
            throw Error("MalformedRecord", path + " line " + std::to_string(i + 1) +
                                               ": bad flag '" + flag + "'");
        mapping[api] = covered;
    }
    return mapping;
}

CoverageReport coverage_compare(const std::vector<std::pair<std::string, long>>& table,
                                const std::map<std::string, bool>& mapping) {
    CoverageReport report;
    report.total = static_cast<long>(table.size());
    for (const auto& [api, count] : table) {
        auto it = mapping.find(api);
        bool covered = it != mapping.end() && it->second;
        if (covered) ++report.covered;
        report.rows.push_back({api, count, covered});
    }
    return report;
}

// ------------------------------------------------------------- human eval

namespace {

bool valid_score(double score) { return score == 0.0 || score == 0.5 || score == 1.0; }

void validate_redundancy(const RedundancyAnnotation& a) {
    if (!valid_score(a.score))
        throw Error("InvalidScore", "redundancy score for '" + a.api_name +
                                        "' must be 0, 0.5, or 1");
    for (const auto& tag : a.tags)
        if (tag != "complex" && tag != "synonym")
            throw Error("InvalidScore", "unknown redundancy tag '" + tag + "'");
    if (!a.tags.empty() && a.score != 0.5)
        throw Error("InvalidScore", "tags are permitted only on 0.5 scores ('" + a.api_name +
                                        "')");
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

} // namespace

AnnotationSet load_annotations(const std::vector<std::string>& paths) {
    AnnotationSet set;
    for (const auto& path : paths) {
        auto lines = split_lines(read_file(path));
        for (size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(lines[i]);
                std::string type = doc.at("type").get<std::string>();
                if (type == "redundancy") {
                    RedundancyAnnotation a;
                    a.api_name = doc.at("api_name").get<std::string>();
                    a.score = doc.at("score").get<double>();
                    if (doc.contains("tags"))
                        for (const auto& tag : doc.at("tags"))
                            a.tags.insert(tag.get<std::string>());
                    set.redundancy_by_variant[doc.at("variant").get<std::string>()]
                        .push_back(std::move(a));
                } else if (type == "faithfulness") {
                    FaithfulnessAnnotation a;
                    a.tutorial_id = doc.at("tutorial_id").get<std::string>();
                    a.step = doc.at("step").get<int>();
                    a.score = doc.at("score").get<double>();
                    set.faithfulness_by_variant[doc.at("variant").get<std::string>()]
                        .push_back(std::move(a));
                } else if (type == "ranking") {
                    RankingAnnotation a;
                    a.tutorial_id = doc.at("tutorial_id").get<std::string>();
                    a.step = doc.at("step").get<int>();
                    for (const auto& [variant, rank] : doc.at("ranks").items())
                        a.ranks[variant] = rank.get<double>();
                    set.rankings.push_back(std::move(a));
                } else {
                    throw Error("MalformedRecord", "unknown annotation type '" + type + "'");
                }
            } catch (const nlohmann::json::exception& e) {
                throw Error("MalformedRecord",
                            path + " line " + std::to_string(i + 1) + ": " + e.what());
            }
        }
    }
    return set;
}

void append_annotation_line(const std::string& path, const std::string& json_line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("FileWriteFailure", path);
    out << json_line << '\n';
}

std::vector<std::string> report_header() {
    return {"Score", "-Complex", "-Complex -Synonym", "Faithfulness Score", "Ranking", "Avg. #"};
}

std::vector<ReportRow>
human_eval_report(const AnnotationSet& annotations,
                  const std::map<std::string, std::vector<pool::InductionRecord>>&
                      records_by_variant) {
    std::set<std::string> variants;
    for (const auto& [variant, ignored] : annotations.redundancy_by_variant)
        variants.insert(variant);
    for (const auto& [variant, ignored] : annotations.faithfulness_by_variant)
        variants.insert(variant);
    for (const auto& ranking : annotations.rankings)
        for (const auto& [variant, ignored] : ranking.ranks) variants.insert(variant);
    for (const auto& [variant, ignored] : records_by_variant) variants.insert(variant);

    for (const auto& ranking : annotations.rankings) {
        size_t count = ranking.ranks.size();
        double expected_sum = static_cast<double>(count * (count + 1)) / 2.0;
        double sum = 0.0;
        for (const auto& [variant, rank] : ranking.ranks) {
            if (rank < 1.0 || rank > static_cast<double>(count))
                throw Error("InconsistentRanking",
                            "rank out of [1, " + std::to_string(count) + "] for tutorial " +
                                ranking.tutorial_id);
            sum += rank;
        }
        if (std::abs(sum - expected_sum) > 1e-9)
            throw Error("InconsistentRanking", "ranks of tutorial " + ranking.tutorial_id +
                                                   " step " + std::to_string(ranking.step) +
                                                   " do not form a tied-rank assignment");
    }

    // Known variants first in pipeline order, anything else alphabetical.
    std::vector<std::string> ordered;
    for (const char* known : {"base", "base-usecase", "base-usecase-desc"})
        if (variants.erase(known)) ordered.push_back(known);
    ordered.insert(ordered.end(), variants.begin(), variants.end());

    std::vector<ReportRow> rows;
    for (const auto& variant : ordered) {
        ReportRow row;
        row.variant = variant;

        if (auto it = annotations.redundancy_by_variant.find(variant);
            it != annotations.redundancy_by_variant.end() && !it->second.empty()) {
            std::vector<double> full, no_complex, no_complex_synonym;
            for (const auto& a : it->second) {
                validate_redundancy(a);
                full.push_back(a.score);
                bool complex_tagged = a.score == 0.5 && a.tags.count("complex");
                bool synonym_tagged = a.score == 0.5 && a.tags.count("synonym");
                no_complex.push_back(complex_tagged ? 0.0 : a.score);
                no_complex_synonym.push_back(complex_tagged || synonym_tagged ? 0.0 : a.score);
            }
            row.redundancy_score = 100.0 * mean_of(full);
            row.minus_complex = 100.0 * mean_of(no_complex);
            row.minus_complex_synonym = 100.0 * mean_of(no_complex_synonym);
        }

        if (auto it = annotations.faithfulness_by_variant.find(variant);
            it != annotations.faithfulness_by_variant.end() && !it->second.empty()) {
            std::vector<double> scores;
            for (const auto& a : it->second) {
                if (!valid_score(a.score))
                    throw Error("InvalidScore", "faithfulness score must be 0, 0.5, or 1");
                scores.push_back(a.score);
            }
            row.faithfulness_score = 100.0 * mean_of(scores);
        }

        std::vector<double> ranks;
        for (const auto& ranking : annotations.rankings)
            if (auto it = ranking.ranks.find(variant); it != ranking.ranks.end())
                ranks.push_back(it->second);
        row.mean_rank = mean_of(ranks);

        if (auto it = records_by_variant.find(variant);
            it != records_by_variant.end() && !it->second.empty()) {
            long induced = 0;
            for (const auto& record : it->second)
                induced += static_cast<long>(record.new_apis.size());
            row.avg_new_apis = static_cast<double>(induced) /
                               static_cast<double>(it->second.size());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_report(const std::vector<ReportRow>& rows) {
    char buf[256];
    std::string out = "Induction Pipelines";
    for (const auto& column : report_header()) out += " | " + column;
    out += '\n';
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s | %.2f | %.2f | %.2f | %.1f | %.3f | %.2f\n",
                      row.variant.c_str(), row.redundancy_score, row.minus_complex,
                      row.minus_complex_synonym, row.faithfulness_score, row.mean_rank,
                      row.avg_new_apis);
        out += buf;
    }
    return out;
}

std::string report_to_csv(const std::vector<ReportRow>& rows) {
    std::string out =
        "variant,redundancy_score,minus_complex,minus_complex_synonym,"
        "faithfulness_score,ranking,avg_new_apis\n";
    for (const auto& row : rows) {
        out += row.variant + ',' + format_double(row.redundancy_score) + ',' +
               format_double(row.minus_complex) + ',' +
               format_double(row.minus_complex_synonym) + ',' +
               format_double(row.faithfulness_score) + ',' + format_double(row.mean_rank) +
               ',' + format_double(row.avg_new_apis) + '\n';
    }
    return out;
}

// ------------------------------------------------------------- exports

ExportFormat format_from_name(const std::string& name) {
    if (name == "csv") return ExportFormat::Csv;
    if (name == "svg") return ExportFormat::Svg;
    throw Error("UnsupportedFormat", "'" + name + "' (expected csv or svg)");
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "step,size\n";
    for (const auto& point : curve)
        out += std::to_string(point.step) + ',' + std::to_string(point.size) + '\n';
    return out;
}

std::string ratio_series_to_csv(const RatioSeries& series, int last_step) {
    std::map<int, double> raw, ma;
    for (const auto& point : series.raw) raw[point.step] = point.value;
    for (const auto& point : series.moving_average) ma[point.step] = point.value;
    std::string out = "step,ratio,moving_avg\n";
    for (int step = 1; step <= last_step; ++step) {
        out += std::to_string(step);
        out += ',';
        if (auto it = raw.find(step); it != raw.end()) out += format_double(it->second);
        out += ',';
        if (auto it = ma.find(step); it != ma.end()) out += format_double(it->second);
        out += '\n';
    }
    return out;
}

std::string frequency_to_csv(const std::vector<std::pair<std::string, long>>& table) {
    std::string out = "api,total_calls\n";
    for (const auto& [api, count] : table)
        out += api + ',' + std::to_string(count) + '\n';
    return out;
}

std::string api_embeddings_csv(const pool::PoolState& state, retrieval::Embedder& embedder) {
    std::string out = "api";
    for (size_t i = 0; i < embedder.dimension(); ++i) out += ",c" + std::to_string(i);
    out += '\n';
    for (const auto& [name, entry] : state.apis) {
        out += name;
        for (double component : embedder.embed(name)) {
            out += ',';
            out += format_double(component);
        }
        out += '\n';
    }
    return out;
}

std::string frequency_to_svg(const std::vector<std::pair<std::string, long>>& table) {
    constexpr double kBarHeight = 14.0;
    constexpr double kRowGap = 4.0;
    constexpr double kLabelWidth = 180.0;
    constexpr double kUnitLength = 60.0;   // pixels per decade

    double height = 20.0 + static_cast<double>(table.size()) * (kBarHeight + kRowGap);
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" +
                      format_double(height) + "\">\n";
    double y = 10.0;
    for (const auto& [api, count] : table) {
        double length = count >= 1 ? kUnitLength * std::log10(static_cast<double>(count)) : 0.0;
        out += "  <text x=\"4\" y=\"" + format_double(y + kBarHeight - 3.0) +
               "\" font-size=\"11\" font-family=\"monospace\">" + api + " (" +
               std::to_string(count) + ")</text>\n";
        out += "  <rect x=\"" + format_double(kLabelWidth) + "\" y=\"" + format_double(y) +
               "\" width=\"" + format_double(length) + "\" height=\"" +
               format_double(kBarHeight) + "\" fill=\"#4466aa\"/>\n";
        y += kBarHeight + kRowGap;
    }
    out += "</svg>\n";
    return out;
}

} // namespace apiforge::analytics
