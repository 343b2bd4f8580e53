#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace apiforge::corpus {

struct InstructionStep {
    int index = 0;              // 1-based ordinal
    std::string headline;       // the step instruction
    std::string description;    // optional paragraph body, empty when absent

    bool operator==(const InstructionStep&) const = default;
};

struct Tutorial {
    std::string id;
    std::string title;                      // the goal
    std::vector<std::string> category;      // category path, root first
    std::vector<InstructionStep> steps;     // indices exactly 1..n

    bool operator==(const Tutorial&) const = default;
};

// Load-time predicate on the category path. Empty keep list keeps everything.
struct CorpusFilter {
    std::vector<std::string> keep_categories;

    bool keeps(const Tutorial& t) const;
};

// Reads a line-delimited corpus file (one JSON record per line).
// Throws Error("MalformedRecord", ...) with the line number, or
// Error("DuplicateTutorialId", ...).
std::vector<Tutorial> load_corpus(const std::string& path, const CorpusFilter& filter = {});

// Parses a single record line; `line_number` is used for error reporting only.
Tutorial parse_record(const std::string& line, int line_number);

std::string record_to_json_line(const Tutorial& t);

// n distinct tutorials drawn without replacement, deterministic per
// (corpus, n, seed). Throws Error("SampleTooLarge") when n > corpus size.
std::vector<Tutorial> sample_tutorials(const std::vector<Tutorial>& corpus, size_t n,
                                       std::uint64_t seed);

// "TASK:\n<title>\nINSTRUCTIONS:\n" then one "<index>. <headline>" line per
// step; the description is appended after the headline when the flag is set
// and the step has one.
std::string render_instructions(const Tutorial& t, bool include_descriptions);

// Title concatenated with the numbered step lines: the similarity key used
// for demonstration retrieval. First line is always the title.
std::string retrieval_key(const Tutorial& t, bool include_descriptions);

// Digest over the canonical record serialization of the whole corpus, used
// to detect corpus swaps on resume.
std::string corpus_digest(const std::vector<Tutorial>& corpus);

} // namespace apiforge::corpus
