#pragma once
#include "apiforge/agentlang.hpp"
#include "apiforge/corpus.hpp"
#include "apiforge/worldmodel.hpp"

#include <map>
#include <string>
#include <vector>

namespace apiforge::pool {

struct ApiEntry {
    worldmodel::ApiSignature signature;
    long total_calls = 0;
    std::map<int, long> calls_by_step;           // step index -> calls at that step
    std::vector<agentlang::UseCase> use_cases;   // deduplicated by snippet bytes
    int first_seen_step = 0;                     // 0 for seed provenance

    bool operator==(const ApiEntry&) const = default;
};

struct DemoEntry {
    std::string tutorial_id;
    std::string program_text;    // verbatim accepted program
    std::string retrieval_key;   // title line + numbered step lines
    int step_added = 0;

    bool operator==(const DemoEntry&) const = default;
};

struct PoolState {
    std::map<std::string, ApiEntry> apis;
    std::vector<DemoEntry> demos;            // appended in step order
    int step_counter = 0;

    bool operator==(const PoolState&) const = default;
};

struct InductionRecord {
    int step = 0;
    std::string tutorial_id;
    int attempts = 0;
    int unique_apis_evoked = 0;
    std::vector<std::string> new_apis;
    bool accepted = false;

    bool operator==(const InductionRecord&) const = default;
};

// A seed demonstration file: TASK:, INSTRUCTIONS: (numbered lines), PROGRAM:.
struct SeedDemo {
    corpus::Tutorial tutorial;   // id = file stem, steps from the numbered lines
    std::string program_text;
};

SeedDemo parse_seed_demo(const std::string& path);

// Base registry plus everything the seed programs call, all provenance=seed,
// first_seen_step=0. Duplicate tutorial ids are skipped, not an error.
// Throws Error("SeedParseFailure") / Error("SeedCoverageFailure").
PoolState seed_from_annotations(const std::vector<std::string>& files);

struct RegisterOptions {
    int attempts = 1;                    // recorded in the InductionRecord
    bool include_descriptions = false;   // retrieval keys mirror the variant
};

// Folds a verified program into the pool at `step` and returns the record.
// New callees get provenance=induced and first_seen_step=step.
InductionRecord register_program(PoolState& state, int step, const corpus::Tutorial& tutorial,
                                 const agentlang::AgentProgram& program,
                                 const std::string& source_text,
                                 const RegisterOptions& options = {});

// Advances the step counter for a tutorial that produced no accepted program.
InductionRecord record_skip(PoolState& state, int step, const std::string& tutorial_id,
                            int attempts);

// Names with total_calls >= threshold, descending by count then ascending by
// name. Threshold must be >= 1.
std::vector<std::string> filter_by_frequency(const PoolState& state, long threshold);

// Canonical single-document persistence with a format version and checksum.
// load(persist(p)) is structurally equal to p, program texts bit-exact.
std::string to_document(const PoolState& state);
PoolState from_document(const std::string& document);   // throws Error("CorruptState")

void persist(const PoolState& state, const std::string& path);
PoolState load(const std::string& path);

std::string record_to_json_line(const InductionRecord& record);
InductionRecord record_from_json_line(const std::string& line);

void save_records(const std::vector<InductionRecord>& records, const std::string& path);
std::vector<InductionRecord> load_records(const std::string& path);

} // namespace apiforge::pool
