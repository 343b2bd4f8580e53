#pragma once
#include "apiforge/agentlang.hpp"
#include "apiforge/corpus.hpp"

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace apiforge::genclient {

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string name() const = 0;
    virtual std::string generate(const std::string& prompt, double temperature) = 0;
};

// One generation exchange, keyed by the digest of the prompt text.
struct CassetteRecord {
    std::string prompt_digest;
    double temperature = 0.0;
    std::string completion;
};

std::vector<CassetteRecord> load_cassette(const std::string& path);

// Append-only cassette file, one JSON record per line.
class CassetteWriter {
public:
    CassetteWriter(std::string path, bool truncate);
    void append(const CassetteRecord& record);

private:
    std::string path_;
};

// Serves recorded completions; matching record digests are consumed in file
// order, a miss throws Error("CassetteMiss"). Never touches the network.
class ReplayBackend : public GenerationBackend {
public:
    explicit ReplayBackend(const std::string& cassette_path);
    std::string name() const override { return "replay"; }
    std::string generate(const std::string& prompt, double temperature) override;

private:
    std::vector<CassetteRecord> records_;
    std::vector<bool> consumed_;
};

// Wraps another backend and appends every exchange to a cassette.
class RecordingBackend : public GenerationBackend {
public:
    RecordingBackend(std::shared_ptr<GenerationBackend> inner, const std::string& cassette_path);
    std::string name() const override { return inner_->name() + "+record"; }
    std::string generate(const std::string& prompt, double temperature) override;

private:
    std::shared_ptr<GenerationBackend> inner_;
    CassetteWriter writer_;
};

// Emits a fixed queue of completions, ignoring the prompt. Test double.
class MockBackend : public GenerationBackend {
public:
    explicit MockBackend(std::vector<std::string> completions);
    std::string name() const override { return "mock"; }
    std::string generate(const std::string& prompt, double temperature) override;

    int calls_made() const { return calls_made_; }

private:
    std::deque<std::string> queue_;
    int calls_made_ = 0;
};

// Looks up the completion by the target task title (the last TASK: block of
// the prompt). Script file format: "### TASK: <title>" header lines, each
// followed by that task's completion text.
class ScriptedBackend : public GenerationBackend {
public:
    explicit ScriptedBackend(std::map<std::string, std::string> by_title);
    static ScriptedBackend from_file(const std::string& path);
    std::string name() const override { return "scripted"; }
    std::string generate(const std::string& prompt, double temperature) override;

private:
    std::map<std::string, std::string> by_title_;
};

struct LiveBackendConfig {
    std::string host;                 // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "APIFORGE_GENERATION_API_KEY";
    int timeout_seconds = 120;
    int max_retries = 2;
};

// Chat-completion HTTP client. Throws Error("BackendUnavailable") after
// bounded retries.
std::unique_ptr<GenerationBackend> make_live_backend(const LiveBackendConfig& config);

// Text after the first "PROGRAM:" marker line if present, else the whole
// completion; code-fence lines are stripped in both cases.
std::string extract_program_section(const std::string& completion);

struct VerifiedProgram {
    agentlang::AgentProgram program;
    std::string source_text;
    int attempts_used = 0;
};

struct RejectionOutcome {
    std::optional<VerifiedProgram> program;      // empty -> tutorial skipped
    std::vector<std::string> failure_reasons;    // one per rejected attempt
    int attempts_used = 0;

    bool accepted() const { return program.has_value(); }
};

// Attempts generation with temperature_schedule[i] per attempt i; the first
// completion whose PROGRAM section parses and covers every numbered step is
// returned. After max_attempts rejections the tutorial is skipped.
RejectionOutcome generate_with_rejection(GenerationBackend& backend, const std::string& prompt,
                                         const corpus::Tutorial& tutorial, int max_attempts,
                                         const std::vector<double>& temperature_schedule);

} // namespace apiforge::genclient
