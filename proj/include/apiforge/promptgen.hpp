#pragma once
#include "apiforge/corpus.hpp"
#include "apiforge/pool.hpp"
#include "apiforge/retrieval.hpp"

#include <optional>
#include <string>

namespace apiforge::promptgen {

enum class PipelineVariant { Base, BaseUseCase, BaseUseCaseDesc };

const char* variant_name(PipelineVariant variant);
PipelineVariant variant_from_name(const std::string& name);   // throws Error("UnknownVariant")

constexpr bool includes_use_cases(PipelineVariant v) { return v != PipelineVariant::Base; }
constexpr bool includes_descriptions(PipelineVariant v) {
    return v == PipelineVariant::BaseUseCaseDesc;
}

// Instruction text sent ahead of the demonstrations: task requirements plus
// the object formalism.
std::string default_system_asset();

struct PromptOptions {
    std::string system_asset;          // empty -> default_system_asset()
    size_t char_budget = 90000;        // soft cap on the rendered prompt
    // -1 mirrors the variant; 0/1 force descriptions out of or into the
    // target rendering and retrieval query.
    int description_override = -1;
};

struct PromptSpec {
    std::string system_text;
    std::optional<std::string> use_case_block;
    std::string demo_block;
    std::string target_block;

    // Concatenation in order: system, use cases, demos, target. Ends with
    // the literal line "PROGRAM:".
    std::string render() const;
};

// Demonstrations are ordered least-similar first so the best match sits next
// to the target. Use cases: the top-1 per API that has any, ordered by
// first_seen_step then name. Over the soft budget, least-similar demos are
// dropped first (down to one), then oldest use cases.
// Throws Error("EmptyPool") when the pool holds no demonstrations.
PromptSpec build_prompt(PipelineVariant variant, const corpus::Tutorial& tutorial,
                        const pool::PoolState& state, retrieval::Embedder& embedder, size_t k,
                        const PromptOptions& options = {});

} // namespace apiforge::promptgen
