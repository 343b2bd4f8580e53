#pragma once
#include "apiforge/corpus.hpp"
#include "apiforge/genclient.hpp"
#include "apiforge/pool.hpp"
#include "apiforge/promptgen.hpp"
#include "apiforge/retrieval.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace apiforge::induction {

struct RunConfig {
    promptgen::PipelineVariant variant = promptgen::PipelineVariant::BaseUseCaseDesc;
    size_t k = 10;
    int max_attempts = 3;
    std::vector<double> temperature_schedule{0.0, 0.3, 0.7};
    size_t sample_size = 0;          // 0 keeps the whole corpus
    std::uint64_t sample_seed = 0;
    int checkpoint_interval = 10;
    size_t prompt_char_budget = 90000;
    std::string system_asset;        // empty -> built-in asset
    int description_override = -1;   // -1 mirrors the variant

    // Digest over every field that affects results; resume refuses to
    // continue under a different digest.
    std::string digest() const;
};

struct RunHooks {
    std::string checkpoint_path;     // empty -> no checkpoints
    std::string prompt_log_dir;      // empty -> prompts not logged
    // Per-step structured log line (step, tutorial, attempts, unique, new,
    // accepted); null -> silent.
    std::function<void(const std::string&)> log_line;
    // Stop cleanly after this many tutorials in this invocation (a
    // checkpoint is written first); the run is then resumable.
    size_t max_steps = std::numeric_limits<size_t>::max();
};

struct RunResult {
    pool::PoolState state;
    std::vector<pool::InductionRecord> records;
    bool completed = false;          // false -> stopped early via max_steps
};

// Sequentially processes the sampled tutorials: retrieve, build prompt,
// generate with rejection, register or skip. Each accepted program becomes a
// demonstration for every later step. On BackendUnavailable or CassetteMiss
// a checkpoint is written before the error propagates.
RunResult run(const RunConfig& config, const std::vector<corpus::Tutorial>& corpus,
              const pool::PoolState& seed_pool, genclient::GenerationBackend& backend,
              retrieval::Embedder& embedder, const RunHooks& hooks = {});

struct Checkpoint {
    std::string config_digest;
    std::string corpus_digest;
    size_t position = 0;             // tutorials fully processed
    pool::PoolState state;
    std::vector<pool::InductionRecord> records;
};

void write_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);   // throws Error("CorruptState")

// Continues a checkpointed run. Throws Error("ConfigMismatch") or
// Error("CorpusMismatch") when the digests disagree with the checkpoint.
RunResult resume(const std::string& checkpoint_path, const RunConfig& config,
                 const std::vector<corpus::Tutorial>& corpus,
                 genclient::GenerationBackend& backend, retrieval::Embedder& embedder,
                 const RunHooks& hooks = {});

} // namespace apiforge::induction
