#include "apiforge/promptgen.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"

#include <algorithm>

namespace apiforge::promptgen {

const char* variant_name(PipelineVariant variant) {
    switch (variant) {
    case PipelineVariant::Base: return "base";
    case PipelineVariant::BaseUseCase: return "base-usecase";
    case PipelineVariant::BaseUseCaseDesc: return "base-usecase-desc";
    }
    return "base";
}

PipelineVariant variant_from_name(const std::string& name) {
    if (name == "base") return PipelineVariant::Base;
    if (name == "base-usecase") return PipelineVariant::BaseUseCase;
    if (name == "base-usecase-desc") return PipelineVariant::BaseUseCaseDesc;
    throw Error("UnknownVariant", "'" + name + "' (expected base, base-usecase, "
                                  "or base-usecase-desc)");
}

namespace {

// A demonstration is a complete TASK/INSTRUCTIONS/PROGRAM block; the
// retrieval key holds the title on its first line and the step lines after.
std::string render_demo(const pool::DemoEntry& demo) {
    auto lines = split_lines(demo.retrieval_key);
    std::string out = "TASK:\n";
    out += lines.empty() ? demo.tutorial_id : lines[0];
    out += "\nINSTRUCTIONS:\n";
    for (size_t i = 1; i < lines.size(); ++i) {
        out += lines[i];
        out += '\n';
    }
    out += "PROGRAM:\n";
    out += demo.program_text;
    if (out.empty() || out.back() != '\n') out += '\n';
    return out;
}

std::string render_use_case(const std::string& api_name, const agentlang::UseCase& use_case) {
    return "# Use Case of " + api_name + "\n" + use_case.snippet + "\n";
}

} // namespace

std::string PromptSpec::render() const {
    std::string out = system_text;
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += '\n';
    if (use_case_block) {
        out += *use_case_block;
        out += '\n';
    }
    out += demo_block;
    out += target_block;
    return out;
}

PromptSpec build_prompt(PipelineVariant variant, const corpus::Tutorial& tutorial,
                        const pool::PoolState& state, retrieval::Embedder& embedder, size_t k,
                        const PromptOptions& options) {
    if (state.demos.empty())
        throw Error("EmptyPool", "no demonstrations to retrieve; seed the pool first");
    if (k < 1) throw Error("InvalidArgument", "k must be >= 1");

    bool with_descriptions = options.description_override >= 0
                                 ? options.description_override > 0
                                 : includes_descriptions(variant);
    std::string query = corpus::retrieval_key(tutorial, with_descriptions);

    // Most similar first from retrieval; rendered least-similar first so the
    // best demonstration ends up adjacent to the target block.
    auto ranked = retrieval::top_k_demos(state, query, k, embedder);
    std::vector<std::string> demo_texts;
    demo_texts.reserve(ranked.size());
    for (auto it = ranked.rbegin(); it != ranked.rend(); ++it)
        demo_texts.push_back(render_demo(**it));

    std::vector<std::string> use_case_texts;
    if (includes_use_cases(variant)) {
        std::vector<const pool::ApiEntry*> entries;
        for (const auto& [name, entry] : state.apis)
            if (!entry.use_cases.empty()) entries.push_back(&entry);
        std::sort(entries.begin(), entries.end(),
                  [](const pool::ApiEntry* a, const pool::ApiEntry* b) {
                      if (a->first_seen_step != b->first_seen_step)
                          return a->first_seen_step < b->first_seen_step;
                      return a->signature.name < b->signature.name;
                  });
        for (const auto* entry : entries) {
            const auto& best =
                retrieval::top1_use_case(state, entry->signature.name, query, embedder);
            use_case_texts.push_back(render_use_case(entry->signature.name, best));
        }
    }

    PromptSpec prompt;
    prompt.system_text = options.system_asset.empty() ? default_system_asset()
                                                      : options.system_asset;
    prompt.target_block = corpus::render_instructions(tutorial, with_descriptions) + "PROGRAM:\n";

    // Soft budget: drop least-similar demos (front of the list) down to one,
    // then the oldest use cases. Sizes are tracked arithmetically so trimming
    // costs nothing; the blocks are assembled once at the end.
    size_t fixed = prompt.system_text.size() +
                   (prompt.system_text.empty() || prompt.system_text.back() != '\n' ? 1 : 0) +
                   1 + prompt.target_block.size() + (includes_use_cases(variant) ? 1 : 0);
    size_t demos_size = 0;
    for (const auto& text : demo_texts) demos_size += text.size() + 1;
    size_t use_cases_size = 0;   // overestimates the rendered block by one byte
    for (const auto& text : use_case_texts) use_cases_size += text.size() + 1;

    size_t drop_demos = 0;
    size_t drop_use_cases = 0;
    while (fixed + demos_size + use_cases_size > options.char_budget &&
           (demo_texts.size() - drop_demos > 1 || use_case_texts.size() > drop_use_cases)) {
        if (demo_texts.size() - drop_demos > 1) {
            demos_size -= demo_texts[drop_demos].size() + 1;
            ++drop_demos;
        } else {
            use_cases_size -= use_case_texts[drop_use_cases].size() + 1;
            ++drop_use_cases;
        }
    }
    demo_texts.erase(demo_texts.begin(), demo_texts.begin() + static_cast<long>(drop_demos));
    use_case_texts.erase(use_case_texts.begin(),
                         use_case_texts.begin() + static_cast<long>(drop_use_cases));

    for (const auto& text : demo_texts) {
        prompt.demo_block += text;
        prompt.demo_block += '\n';
    }
    if (includes_use_cases(variant)) {
        std::string block;
        for (const auto& text : use_case_texts) {
            block += text;
            block += '\n';
        }
        if (!block.empty()) block.pop_back();   // single separator before demos
        prompt.use_case_block = std::move(block);
    }
    return prompt;
}

} // namespace apiforge::promptgen
