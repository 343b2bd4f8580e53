#include "apiforge/genclient.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <fstream>

namespace apiforge::genclient {

std::vector<CassetteRecord> load_cassette(const std::string& path) {
    std::vector<CassetteRecord> records;
    for (const auto& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        try {
            auto doc = nlohmann::json::parse(line);
            CassetteRecord record;
            record.prompt_digest = doc.at("prompt_digest").get<std::string>();
            record.temperature = doc.at("temperature").get<double>();
            record.completion = doc.at("completion").get<std::string>();
            records.push_back(std::move(record));
        } catch (const nlohmann::json::exception& e) {
            throw Error("MalformedRecord", path + ": cassette line: " + e.what());
        }
    }
    return records;
}

CassetteWriter::CassetteWriter(std::string path, bool truncate) : path_(std::move(path)) {
    std::ofstream out(path_, truncate ? std::ios::trunc : std::ios::app);
    if (!out) throw Error("FileWriteFailure", path_);
}

void CassetteWriter::append(const CassetteRecord& record) {
    nlohmann::ordered_json doc;
    doc["prompt_digest"] = record.prompt_digest;
    doc["temperature"] = record.temperature;
    doc["completion"] = record.completion;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("FileWriteFailure", path_);
    out << doc.dump() << '\n';
}

ReplayBackend::ReplayBackend(const std::string& cassette_path)
    : records_(load_cassette(cassette_path)), consumed_(records_.size(), false) {}

std::string ReplayBackend::generate(const std::string& prompt, double /*temperature*/) {
    std::string digest = digest_hex(prompt);
    for (size_t i = 0; i < records_.size(); ++i) {
        if (consumed_[i] || records_[i].prompt_digest != digest) continue;
        consumed_[i] = true;
        return records_[i].completion;
    }
    throw Error("CassetteMiss", "no unconsumed record for prompt digest " + digest);
}

RecordingBackend::RecordingBackend(std::shared_ptr<GenerationBackend> inner,
                                   const std::string& cassette_path)
    : inner_(std::move(inner)), writer_(cassette_path, /*truncate=*/true) {}

std::string RecordingBackend::generate(const std::string& prompt, double temperature) {
    std::string completion = inner_->generate(prompt, temperature);
    writer_.append({digest_hex(prompt), temperature, completion});
    return completion;
}

MockBackend::MockBackend(std::vector<std::string> completions)
    : queue_(completions.begin(), completions.end()) {}

std::string MockBackend::generate(const std::string& /*prompt*/, double /*temperature*/) {
    if (queue_.empty()) throw Error("MockExhausted", "no scripted completions left");
    ++calls_made_;
    std::string completion = std::move(queue_.front());
    queue_.pop_front();
    return completion;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> by_title)
    : by_title_(std::move(by_title)) {}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    constexpr const char* kHeader = "### TASK: ";
    std::map<std::string, std::string> by_title;
    std::string title;
    std::string body;
    auto flush = [&]() {
        if (!title.empty()) by_title[title] = body;
        body.clear();
    };
    for (const auto& line : split_lines(read_file(path))) {
        if (starts_with(line, kHeader)) {
            flush();
            title = trim(line.substr(std::string(kHeader).size()));
        } else if (!title.empty()) {
            body += line;
            body += '\n';
        }
    }
    flush();
    if (by_title.empty()) throw Error("MalformedRecord", path + ": no '### TASK:' sections");
    return ScriptedBackend(std::move(by_title));
}

std::string ScriptedBackend::generate(const std::string& prompt, double /*temperature*/) {
    // The target block is the last TASK: section of the prompt.
    size_t pos = prompt.rfind("TASK:\n");
    if (pos == std::string::npos)
        throw Error("ScriptMiss", "prompt has no TASK: block");
    size_t title_start = pos + 6;
    size_t title_end = prompt.find('\n', title_start);
    std::string title = trim(prompt.substr(title_start, title_end - title_start));
    auto it = by_title_.find(title);
    if (it == by_title_.end()) throw Error("ScriptMiss", "no completion for task '" + title + "'");
    return it->second;
}

std::string extract_program_section(const std::string& completion) {
    std::vector<std::string> lines;
    for (auto& line : split_lines(completion)) {
        if (starts_with(trim(line), "```")) continue;   // code fences
        lines.push_back(std::move(line));
    }
    size_t begin = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]) == "PROGRAM:") {
            begin = i + 1;
            break;
        }
    }
    std::string out;
    for (size_t i = begin; i < lines.size(); ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

namespace {

std::string describe_missing(const std::vector<int>& missing) {
    std::string out = "MissingSteps([";
    for (size_t i = 0; i < missing.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(missing[i]);
    }
    out += "])";
    return out;
}

} // namespace

RejectionOutcome generate_with_rejection(GenerationBackend& backend, const std::string& prompt,
                                         const corpus::Tutorial& tutorial, int max_attempts,
                                         const std::vector<double>& temperature_schedule) {
    if (max_attempts < 1) throw Error("InvalidArgument", "max_attempts must be >= 1");
    if (temperature_schedule.size() < static_cast<size_t>(max_attempts))
        throw Error("InvalidArgument", "temperature schedule shorter than max_attempts");

    RejectionOutcome outcome;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::string completion =
            backend.generate(prompt, temperature_schedule[static_cast<size_t>(attempt)]);
        outcome.attempts_used = attempt + 1;
        std::string section = extract_program_section(completion);

        agentlang::AgentProgram program;
        try {
            program = agentlang::parse(section);
        } catch (const agentlang::ParseError& e) {
            outcome.failure_reasons.push_back(std::string("ParseError: ") + e.reason());
            continue;
        }
        auto coverage = agentlang::check_step_coverage(program, tutorial);
        if (!coverage.ok()) {
            outcome.failure_reasons.push_back(describe_missing(coverage.missing));
            continue;
        }
        outcome.program = VerifiedProgram{std::move(program), std::move(section), attempt + 1};
        return outcome;
    }
    return outcome;
}

} // namespace apiforge::genclient
