#include "apiforge/pool.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace apiforge::pool {

namespace {

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

// Counts calls, learns keyword params, appends use cases and the demo entry.
// Shared by seeding (step 0) and induction registration.
std::vector<std::string> apply_program(PoolState& state, int step,
                                       const corpus::Tutorial& tutorial,
                                       const agentlang::AgentProgram& program,
                                       const std::string& source_text,
                                       worldmodel::Provenance provenance_for_new,
                                       bool include_descriptions, int* unique_out) {
    auto calls = agentlang::extract_calls(program);

    std::vector<std::string> new_apis;
    std::vector<std::string> seen;
    for (const auto& call : calls) {
        if (std::find(seen.begin(), seen.end(), call.callee) == seen.end()) {
            seen.push_back(call.callee);
            if (!state.apis.count(call.callee)) new_apis.push_back(call.callee);
        }
        auto [it, inserted] = state.apis.try_emplace(call.callee);
        ApiEntry& entry = it->second;
        if (inserted) {
            entry.signature.name = call.callee;
            entry.signature.provenance = provenance_for_new;
            entry.first_seen_step = step;
        }
        for (const auto& [kw, value] : call.kwargs) entry.signature.keyword_params.insert(kw);
        entry.total_calls += 1;
        entry.calls_by_step[step] += 1;
    }

    for (auto& use_case : agentlang::extract_use_cases_lenient(program, source_text)) {
        use_case.source_tutorial = tutorial.id;
        auto& cases = state.apis.at(use_case.api_name).use_cases;
        bool duplicate = std::any_of(cases.begin(), cases.end(), [&](const auto& existing) {
            return existing.snippet == use_case.snippet;
        });
        if (!duplicate) cases.push_back(std::move(use_case));
    }

    DemoEntry demo;
    demo.tutorial_id = tutorial.id;
    demo.program_text = source_text;
    demo.retrieval_key = corpus::retrieval_key(tutorial, include_descriptions);
    demo.step_added = step;
    state.demos.push_back(std::move(demo));

    if (unique_out) *unique_out = static_cast<int>(seen.size());
    return new_apis;
}

} // namespace

SeedDemo parse_seed_demo(const std::string& path) {
    std::string content = read_file(path);
    auto lines = split_lines(content);

    SeedDemo demo;
    demo.tutorial.id = file_stem(path);

    size_t i = 0;
    auto expect_marker = [&](const char* marker) {
        while (i < lines.size() && trim(lines[i]).empty()) ++i;
        if (i >= lines.size() || trim(lines[i]) != marker)
            throw Error("SeedParseFailure",
                        path + ": expected '" + marker + "' at line " + std::to_string(i + 1));
        ++i;
    };

    expect_marker("TASK:");
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i >= lines.size())
        throw Error("SeedParseFailure", path + ": missing task title");
    demo.tutorial.title = trim(lines[i]);
    ++i;

    expect_marker("INSTRUCTIONS:");
    while (i < lines.size() && trim(lines[i]) != "PROGRAM:") {
        std::string line = trim(lines[i]);
        ++i;
        if (line.empty()) continue;
        size_t dot = line.find('.');
        if (dot == std::string::npos || dot == 0)
            throw Error("SeedParseFailure",
                        path + ": instruction line " + std::to_string(i) +
                            " is not '<number>. <headline>'");
        corpus::InstructionStep step;
        try {
            step.index = std::stoi(line.substr(0, dot));
        } catch (const std::exception&) {
            throw Error("SeedParseFailure",
                        path + ": bad step number at line " + std::to_string(i));
        }
        step.headline = trim(line.substr(dot + 1));
        if (step.headline.empty())
            throw Error("SeedParseFailure",
                        path + ": empty headline at line " + std::to_string(i));
        demo.tutorial.steps.push_back(std::move(step));
    }
    for (size_t s = 0; s < demo.tutorial.steps.size(); ++s)
        if (demo.tutorial.steps[s].index != static_cast<int>(s) + 1)
            throw Error("SeedParseFailure", path + ": step indices must be exactly 1..n");
    expect_marker("PROGRAM:");

    std::string program;
    for (size_t n = i; n < lines.size(); ++n) {
        program += lines[n];
        program += '\n';
    }
    demo.program_text = std::move(program);
    if (trim(demo.program_text).empty())
        throw Error("SeedParseFailure", path + ": empty PROGRAM section");
    return demo;
}

PoolState seed_from_annotations(const std::vector<std::string>& files) {
    PoolState state;
    for (const auto& signature : worldmodel::base_registry()) {
        ApiEntry entry;
        entry.signature = signature;
        entry.first_seen_step = 0;
        state.apis.emplace(signature.name, std::move(entry));
    }

    for (const auto& file : files) {
        SeedDemo demo = parse_seed_demo(file);
        bool duplicate =
            std::any_of(state.demos.begin(), state.demos.end(),
                        [&](const DemoEntry& d) { return d.tutorial_id == demo.tutorial.id; });
        if (duplicate) continue;

        agentlang::AgentProgram program;
        try {
            program = agentlang::parse(demo.program_text);
        } catch (const agentlang::ParseError& e) {
            throw Error("SeedParseFailure", file + ": " + e.what());
        }
        auto coverage = agentlang::check_step_coverage(program, demo.tutorial);
        if (!coverage.ok()) {
            std::string missing;
            for (int index : coverage.missing) {
                if (!missing.empty()) missing += ", ";
                missing += std::to_string(index);
            }
            throw Error("SeedCoverageFailure", file + ": missing step comments " + missing);
        }
        apply_program(state, 0, demo.tutorial, program, demo.program_text,
                      worldmodel::Provenance::Seed, false, nullptr);
    }
    state.step_counter = 0;
    return state;
}

InductionRecord register_program(PoolState& state, int step, const corpus::Tutorial& tutorial,
                                 const agentlang::AgentProgram& program,
                                 const std::string& source_text,
                                 const RegisterOptions& options) {
    if (step != state.step_counter + 1)
        throw Error("StepOrderViolation", "expected step " +
                                              std::to_string(state.step_counter + 1) +
                                              ", got " + std::to_string(step));
    InductionRecord record;
    record.step = step;
    record.tutorial_id = tutorial.id;
    record.attempts = options.attempts;
    record.accepted = true;
    record.new_apis =
        apply_program(state, step, tutorial, program, source_text,
                      worldmodel::Provenance::Induced, options.include_descriptions,
                      &record.unique_apis_evoked);
    state.step_counter = step;
    return record;
}

InductionRecord record_skip(PoolState& state, int step, const std::string& tutorial_id,
                            int attempts) {
    if (step != state.step_counter + 1)
        throw Error("StepOrderViolation", "expected step " +
                                              std::to_string(state.step_counter + 1) +
                                              ", got " + std::to_string(step));
    state.step_counter = step;
    InductionRecord record;
    record.step = step;
    record.tutorial_id = tutorial_id;
    record.attempts = attempts;
    record.accepted = false;
    return record;
}

std::vector<std::string> filter_by_frequency(const PoolState& state, long threshold) {
    if (threshold < 1) throw Error("InvalidThreshold", "threshold must be >= 1");
    std::vector<const ApiEntry*> entries;
    for (const auto& [name, entry] : state.apis)
        if (entry.total_calls >= threshold) entries.push_back(&entry);
    std::sort(entries.begin(), entries.end(), [](const ApiEntry* a, const ApiEntry* b) {
        if (a->total_calls != b->total_calls) return a->total_calls > b->total_calls;
        return a->signature.name < b->signature.name;
    });
    std::vector<std::string> names;
    names.reserve(entries.size());
    for (const auto* entry : entries) names.push_back(entry->signature.name);
    return names;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr int kFormatVersion = 1;

nlohmann::ordered_json use_case_to_json(const agentlang::UseCase& use_case) {
    nlohmann::ordered_json doc;
    doc["api_name"] = use_case.api_name;
    doc["leading_comment"] = use_case.leading_comment;
    doc["snippet"] = use_case.snippet;
    doc["source_tutorial"] = use_case.source_tutorial;
    doc["source_step"] = use_case.source_step;
    return doc;
}

agentlang::UseCase use_case_from_json(const nlohmann::ordered_json& doc) {
    agentlang::UseCase use_case;
    use_case.api_name = doc.at("api_name").get<std::string>();
    use_case.leading_comment = doc.at("leading_comment").get<std::string>();
    use_case.snippet = doc.at("snippet").get<std::string>();
    use_case.source_tutorial = doc.at("source_tutorial").get<std::string>();
    use_case.source_step = doc.at("source_step").get<int>();
    return use_case;
}

nlohmann::ordered_json pool_to_json(const PoolState& state) {
    nlohmann::ordered_json pool;
    pool["step_counter"] = state.step_counter;
    auto& apis = pool["apis"] = nlohmann::ordered_json::array();
    for (const auto& [name, entry] : state.apis) {   // std::map: already by name
        nlohmann::ordered_json doc;
        doc["name"] = name;
        doc["provenance"] =
            entry.signature.provenance == worldmodel::Provenance::Seed ? "seed" : "induced";
        doc["keyword_params"] = entry.signature.keyword_params;   // std::set: sorted
        doc["first_seen_step"] = entry.first_seen_step;
        doc["total_calls"] = entry.total_calls;
        auto& by_step = doc["calls_by_step"] = nlohmann::ordered_json::array();
        for (const auto& [step, count] : entry.calls_by_step)
            by_step.push_back(nlohmann::ordered_json::array({step, count}));
        auto& cases = doc["use_cases"] = nlohmann::ordered_json::array();
        for (const auto& use_case : entry.use_cases) cases.push_back(use_case_to_json(use_case));
        apis.push_back(std::move(doc));
    }
    auto& demos = pool["demos"] = nlohmann::ordered_json::array();
    for (const auto& demo : state.demos) {   // appended in step order
        nlohmann::ordered_json doc;
        doc["tutorial_id"] = demo.tutorial_id;
        doc["program_text"] = demo.program_text;
        doc["retrieval_key"] = demo.retrieval_key;
        doc["step_added"] = demo.step_added;
        demos.push_back(std::move(doc));
    }
    return pool;
}

PoolState pool_from_json(const nlohmann::ordered_json& pool) {
    PoolState state;
    state.step_counter = pool.at("step_counter").get<int>();
    for (const auto& doc : pool.at("apis")) {
        ApiEntry entry;
        entry.signature.name = doc.at("name").get<std::string>();
        entry.signature.provenance = doc.at("provenance").get<std::string>() == "seed"
                                         ? worldmodel::Provenance::Seed
                                         : worldmodel::Provenance::Induced;
        for (const auto& param : doc.at("keyword_params"))
            entry.signature.keyword_params.insert(param.get<std::string>());
        entry.first_seen_step = doc.at("first_seen_step").get<int>();
        entry.total_calls = doc.at("total_calls").get<long>();
        long sum = 0;
        for (const auto& pair : doc.at("calls_by_step")) {
            long count = pair.at(1).get<long>();
            entry.calls_by_step[pair.at(0).get<int>()] = count;
            sum += count;
        }
        if (sum != entry.total_calls)
            throw Error("CorruptState", "per-step call counts do not sum to total_calls for '" +
                                            entry.signature.name + "'");
        for (const auto& case_doc : doc.at("use_cases"))
            entry.use_cases.push_back(use_case_from_json(case_doc));
        state.apis.emplace(entry.signature.name, std::move(entry));
    }
    for (const auto& doc : pool.at("demos")) {
        DemoEntry demo;
        demo.tutorial_id = doc.at("tutorial_id").get<std::string>();
        demo.program_text = doc.at("program_text").get<std::string>();
        demo.retrieval_key = doc.at("retrieval_key").get<std::string>();
        demo.step_added = doc.at("step_added").get<int>();
        state.demos.push_back(std::move(demo));
    }
    return state;
}

} // namespace

std::string to_document(const PoolState& state) {
    nlohmann::ordered_json pool = pool_to_json(state);
    nlohmann::ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["checksum"] = digest_hex(pool.dump());
    doc["pool"] = std::move(pool);
    return doc.dump(2) + "\n";
}

PoolState from_document(const std::string& document) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw Error("CorruptState", std::string("unparseable state document: ") + e.what());
    }
    try {
        if (doc.at("format_version").get<int>() != kFormatVersion)
            throw Error("CorruptState", "unsupported format version");
        const auto& pool = doc.at("pool");
        if (digest_hex(pool.dump()) != doc.at("checksum").get<std::string>())
            throw Error("CorruptState", "checksum mismatch");
        return pool_from_json(pool);
    } catch (const nlohmann::json::exception& e) {
        throw Error("CorruptState", std::string("malformed state document: ") + e.what());
    }
}

void persist(const PoolState& state, const std::string& path) {
    write_file(path, to_document(state));
}

PoolState load(const std::string& path) { return from_document(read_file(path)); }

std::string record_to_json_line(const InductionRecord& record) {
    nlohmann::ordered_json doc;
    doc["step"] = record.step;
    doc["tutorial_id"] = record.tutorial_id;
    doc["attempts"] = record.attempts;
    doc["unique_apis_evoked"] = record.unique_apis_evoked;
    doc["new_apis"] = record.new_apis;
    doc["accepted"] = record.accepted;
    return doc.dump();
}

InductionRecord record_from_json_line(const std::string& line) {
    InductionRecord record;
    try {
        auto doc = nlohmann::ordered_json::parse(line);
        record.step = doc.at("step").get<int>();
        record.tutorial_id = doc.at("tutorial_id").get<std::string>();
        record.attempts = doc.at("attempts").get<int>();
        record.unique_apis_evoked = doc.at("unique_apis_evoked").get<int>();
        record.new_apis = doc.at("new_apis").get<std::vector<std::string>>();
        record.accepted = doc.at("accepted").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("MalformedRecord", std::string("induction record: ") + e.what());
    }
    return record;
}

void save_records(const std::vector<InductionRecord>& records, const std::string& path) {
    std::string out;
    for (const auto& record : records) {
        out += record_to_json_line(record);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<InductionRecord> load_records(const std::string& path) {
    std::vector<InductionRecord> records;
    for (const auto& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        records.push_back(record_from_json_line(line));
    }
    return records;
}

} // namespace apiforge::pool
