#include "apiforge/induction.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>

namespace apiforge::induction {

std::string RunConfig::digest() const {
    nlohmann::ordered_json doc;
    doc["variant"] = promptgen::variant_name(variant);
    doc["k"] = k;
    doc["max_attempts"] = max_attempts;
    auto& temps = doc["temperature_schedule"] = nlohmann::ordered_json::array();
    for (double t : temperature_schedule) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", t);
        temps.push_back(std::string(buf));
    }
    doc["sample_size"] = sample_size;
    doc["sample_seed"] = sample_seed;
    doc["prompt_char_budget"] = prompt_char_budget;
    doc["description_override"] = description_override;
    doc["system_asset"] = digest_hex(system_asset.empty() ? promptgen::default_system_asset()
                                                          : system_asset);
    return digest_hex(doc.dump());
}

namespace {

constexpr int kFormatVersion = 1;

std::string step_log_line(const pool::InductionRecord& record) {
    std::string new_names;
    for (size_t i = 0; i < record.new_apis.size(); ++i) {
        if (i > 0) new_names += ',';
        new_names += record.new_apis[i];
    }
    return "step=" + std::to_string(record.step) + " tutorial=" + record.tutorial_id +
           " attempts=" + std::to_string(record.attempts) +
           " unique=" + std::to_string(record.unique_apis_evoked) +
           " new=" + std::to_string(record.new_apis.size()) +
           (new_names.empty() ? "" : " new_apis=" + new_names) +
           " accepted=" + (record.accepted ? "1" : "0");
}

RunResult run_from(const RunConfig& config, const std::vector<corpus::Tutorial>& corpus,
                   pool::PoolState state, std::vector<pool::InductionRecord> records,
                   size_t position, genclient::GenerationBackend& backend,
                   retrieval::Embedder& embedder, const RunHooks& hooks) {
    size_t sample_size = config.sample_size == 0 ? corpus.size() : config.sample_size;
    auto sample = corpus::sample_tutorials(corpus, sample_size, config.sample_seed);

    std::string config_digest = config.digest();
    std::string corpus_digest = corpus::corpus_digest(corpus);
    auto checkpoint_now = [&](size_t done) {
        if (hooks.checkpoint_path.empty()) return;
        write_checkpoint({config_digest, corpus_digest, done, state, records},
                         hooks.checkpoint_path);
    };

    if (!hooks.prompt_log_dir.empty())
        std::filesystem::create_directories(hooks.prompt_log_dir);

    promptgen::PromptOptions prompt_options;
    prompt_options.system_asset = config.system_asset;
    prompt_options.char_budget = config.prompt_char_budget;
    prompt_options.description_override = config.description_override;
    bool keys_with_descriptions =
        config.description_override >= 0
            ? config.description_override > 0
            : promptgen::includes_descriptions(config.variant);

    size_t processed_here = 0;
    for (size_t i = position; i < sample.size(); ++i) {
        if (processed_here >= hooks.max_steps) {
            checkpoint_now(i);
            return {std::move(state), std::move(records), false};
        }
        const corpus::Tutorial& tutorial = sample[i];
        int step = state.step_counter + 1;

        std::string prompt =
            promptgen::build_prompt(config.variant, tutorial, state, embedder, config.k,
                                    prompt_options)
                .render();
        if (!hooks.prompt_log_dir.empty()) {
            auto path = std::filesystem::path(hooks.prompt_log_dir) /
                        ("step_" + std::to_string(step) + ".txt");
            write_file(path.string(), prompt);
        }

        genclient::RejectionOutcome outcome;
        try {
            outcome = genclient::generate_with_rejection(backend, prompt, tutorial,
                                                         config.max_attempts,
                                                         config.temperature_schedule);
        } catch (const Error& e) {
            if (e.code() == "BackendUnavailable" || e.code() == "CassetteMiss")
                checkpoint_now(i);   // resumable from the last completed step
            throw;
        }

        pool::InductionRecord record;
        if (outcome.accepted()) {
            pool::RegisterOptions options;
            options.attempts = outcome.program->attempts_used;
            options.include_descriptions = keys_with_descriptions;
            record = pool::register_program(state, step, tutorial, outcome.program->program,
                                            outcome.program->source_text, options);
        } else {
            record = pool::record_skip(state, step, tutorial.id, outcome.attempts_used);
        }
        records.push_back(record);
        ++processed_here;

        if (hooks.log_line) {
            std::string line = step_log_line(record);
            if (!record.accepted)
                for (const auto& reason : outcome.failure_reasons) line += " reason=" + reason;
            hooks.log_line(line);
        }
        if (config.checkpoint_interval > 0 &&
            step % config.checkpoint_interval == 0 && i + 1 < sample.size())
            checkpoint_now(i + 1);
    }
    checkpoint_now(sample.size());
    return {std::move(state), std::move(records), true};
}

} // namespace

RunResult run(const RunConfig& config, const std::vector<corpus::Tutorial>& corpus,
              const pool::PoolState& seed_pool, genclient::GenerationBackend& backend,
              retrieval::Embedder& embedder, const RunHooks& hooks) {
    if (seed_pool.demos.empty())
        throw Error("EmptyPool", "the seed pool has no demonstrations");
    return run_from(config, corpus, seed_pool, {}, 0, backend, embedder, hooks);
}

void write_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    nlohmann::ordered_json inner;
    inner["config_digest"] = checkpoint.config_digest;
    inner["corpus_digest"] = checkpoint.corpus_digest;
    inner["position"] = checkpoint.position;
    inner["pool"] = nlohmann::ordered_json::parse(pool::to_document(checkpoint.state));
    auto& records = inner["records"] = nlohmann::ordered_json::array();
    for (const auto& record : checkpoint.records)
        records.push_back(nlohmann::ordered_json::parse(pool::record_to_json_line(record)));

    nlohmann::ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["checksum"] = digest_hex(inner.dump());
    doc["checkpoint"] = std::move(inner);
    write_file(path, doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error("CorruptState", path + ": unparseable checkpoint: " + e.what());
    }
    try {
        if (doc.at("format_version").get<int>() != kFormatVersion)
            throw Error("CorruptState", path + ": unsupported checkpoint version");
        const auto& inner = doc.at("checkpoint");
        if (digest_hex(inner.dump()) != doc.at("checksum").get<std::string>())
            throw Error("CorruptState", path + ": checksum mismatch");
        Checkpoint checkpoint;
        checkpoint.config_digest = inner.at("config_digest").get<std::string>();
        checkpoint.corpus_digest = inner.at("corpus_digest").get<std::string>();
        checkpoint.position = inner.at("position").get<size_t>();
        checkpoint.state = pool::from_document(inner.at("pool").dump());
        for (const auto& record : inner.at("records"))
            checkpoint.records.push_back(pool::record_from_json_line(record.dump()));
        return checkpoint;
    } catch (const nlohmann::json::exception& e) {
        throw Error("CorruptState", path + ": malformed checkpoint: " + e.what());
    }
}

RunResult resume(const std::string& checkpoint_path, const RunConfig& config,
                 const std::vector<corpus::Tutorial>& corpus,
                 genclient::GenerationBackend& backend, retrieval::Embedder& embedder,
                 const RunHooks& hooks) {
    Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    if (checkpoint.config_digest != config.digest())
        throw Error("ConfigMismatch", "checkpoint was written under a different configuration");
    if (checkpoint.corpus_digest != corpus::corpus_digest(corpus))
        throw Error("CorpusMismatch", "checkpoint was written over a different corpus");
    return run_from(config, corpus, std::move(checkpoint.state), std::move(checkpoint.records),
                    checkpoint.position, backend, embedder, hooks);
}

} // namespace apiforge::induction
