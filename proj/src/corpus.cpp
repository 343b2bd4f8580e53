#include "apiforge/corpus.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_set>

namespace apiforge::corpus {

namespace {

void check_invariants(const Tutorial& t, int line_number) {
    auto fail = [&](const std::string& why) {
        throw Error("MalformedRecord", "line " + std::to_string(line_number) + ": " + why);
    };
    if (t.id.empty()) fail("empty id");
    if (trim(t.title).empty()) fail("empty title");
    for (size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        if (step.index != static_cast<int>(i) + 1)
            fail("step indices must be exactly 1..n, found " + std::to_string(step.index) +
                 " at position " + std::to_string(i + 1));
        if (trim(step.headline).empty())
            fail("empty headline at step " + std::to_string(step.index));
    }
}

} // namespace

bool CorpusFilter::keeps(const Tutorial& t) const {
    if (keep_categories.empty()) return true;
    for (const auto& want : keep_categories)
        for (const auto& have : t.category)
            if (have == want) return true;
    return false;
}

Tutorial parse_record(const std::string& line, int line_number) {
    auto fail = [&](const std::string& why) {
        throw Error("MalformedRecord", "line " + std::to_string(line_number) + ": " + why);
    };
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    if (!doc.is_object()) fail("record is not an object");

    Tutorial t;
    try {
        t.id = doc.at("id").get<std::string>();
        t.title = doc.at("title").get<std::string>();
        if (doc.contains("category"))
            t.category = doc.at("category").get<std::vector<std::string>>();
        for (const auto& step_doc : doc.at("steps")) {
            InstructionStep step;
            step.index = step_doc.at("index").get<int>();
            step.headline = step_doc.at("headline").get<std::string>();
            if (step_doc.contains("description") && !step_doc.at("description").is_null())
                step.description = step_doc.at("description").get<std::string>();
            t.steps.push_back(std::move(step));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    check_invariants(t, line_number);
    return t;
}

std::string record_to_json_line(const Tutorial& t) {
    nlohmann::ordered_json doc;
    doc["id"] = t.id;
    doc["title"] = t.title;
    doc["category"] = t.category;
    auto& steps = doc["steps"] = nlohmann::ordered_json::array();
    for (const auto& step : t.steps) {
        nlohmann::ordered_json s;
        s["index"] = step.index;
        s["headline"] = step.headline;
        if (!step.description.empty()) s["description"] = step.description;
        steps.push_back(std::move(s));
    }
    return doc.dump();
}

std::vector<Tutorial> load_corpus(const std::string& path, const CorpusFilter& filter) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound", path);

    std::vector<Tutorial> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        Tutorial t = parse_record(line, line_number);
        if (!seen_ids.insert(t.id).second)
            throw Error("DuplicateTutorialId",
                        "line " + std::to_string(line_number) + ": id '" + t.id + "'");
        if (filter.keeps(t)) out.push_back(std::move(t));
    }
    return out;
}

std::vector<Tutorial> sample_tutorials(const std::vector<Tutorial>& corpus, size_t n,
                                       std::uint64_t seed) {
    if (n > corpus.size())
        throw Error("SampleTooLarge", "requested " + std::to_string(n) + " of " +
                                          std::to_string(corpus.size()));
    std::vector<size_t> indices(corpus.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    // Hand-rolled Fisher-Yates; std::shuffle is not reproducible across
    // standard libraries.
    std::mt19937_64 gen(seed);
    for (size_t i = indices.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(gen() % i);
        std::swap(indices[i - 1], indices[j]);
    }
    std::vector<Tutorial> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(corpus[indices[i]]);
    return out;
}

namespace {

void append_step_lines(std::string& out, const Tutorial& t, bool include_descriptions) {
    for (const auto& step : t.steps) {
        out += std::to_string(step.index);
        out += ". ";
        out += step.headline;
        if (include_descriptions && !step.description.empty()) {
            out += ' ';
            out += step.description;
        }
        out += '\n';
    }
}

} // namespace

std::string render_instructions(const Tutorial& t, bool include_descriptions) {
    std::string out = "TASK:\n" + t.title + "\nINSTRUCTIONS:\n";
    append_step_lines(out, t, include_descriptions);
    return out;
}

std::string retrieval_key(const Tutorial& t, bool include_descriptions) {
    std::string out = t.title + "\n";
    append_step_lines(out, t, include_descriptions);
    return out;
}

std::string corpus_digest(const std::vector<Tutorial>& corpus) {
    std::uint64_t h = fnv1a64("corpus-v1");
    for (const auto& t : corpus) {
        std::string line = record_to_json_line(t);
        line += '\n';
        h ^= fnv1a64(line);
        h *= 0x100000001b3ULL;
    }
    return to_hex(h);
}

} // namespace apiforge::corpus
