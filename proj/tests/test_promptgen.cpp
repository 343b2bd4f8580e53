#include "apiforge/promptgen.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/pool.hpp"
#include "testutil.hpp"

#include <doctest.h>

using namespace apiforge;
using namespace apiforge::promptgen;

namespace {

struct Setup {
    pool::PoolState state;
    retrieval::Embedder embedder{std::make_shared<retrieval::HashingBackend>(256)};
    std::vector<corpus::Tutorial> tutorials;

    Setup()
        : state(pool::seed_from_annotations(testutil::seed_files())),
          tutorials(corpus::load_corpus(testutil::fixture_path("corpus_small.jsonl"))) {}

    const corpus::Tutorial& tutorial(const std::string& id) const {
        for (const auto& t : tutorials)
            if (t.id == id) return t;
        throw Error("TestBug", id);
    }
};

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++count;
    return count;
}

} // namespace

TEST_CASE("the base variant has no use-case block") {
    Setup setup;
    auto prompt = build_prompt(PipelineVariant::Base, setup.tutorial("t_hot_cocoa"),
                               setup.state, setup.embedder, 10);
    CHECK_FALSE(prompt.use_case_block.has_value());
    CHECK(prompt.render().find("Use Case of") == std::string::npos);
}

TEST_CASE("use-case variants carry exactly one snippet per known API") {
    Setup setup;
    auto prompt = build_prompt(PipelineVariant::BaseUseCase, setup.tutorial("t_hot_cocoa"),
                               setup.state, setup.embedder, 10);
    REQUIRE(prompt.use_case_block.has_value());

    size_t apis_with_cases = 0;
    for (const auto& [name, entry] : setup.state.apis)
        if (!entry.use_cases.empty()) ++apis_with_cases;
    CHECK(count_occurrences(*prompt.use_case_block, "# Use Case of ") == apis_with_cases);

    SUBCASE("ordered by first_seen_step then name") {
        size_t find_pos = prompt.use_case_block->find("# Use Case of find\n");
        size_t squeeze_pos = prompt.use_case_block->find("# Use Case of squeeze\n");
        REQUIRE(find_pos != std::string::npos);
        REQUIRE(squeeze_pos != std::string::npos);
        CHECK(find_pos < squeeze_pos);
    }
}

TEST_CASE("descriptions appear only in the description variant") {
    Setup setup;
    const auto& cocoa = setup.tutorial("t_hot_cocoa");

    auto with = build_prompt(PipelineVariant::BaseUseCaseDesc, cocoa, setup.state,
                             setup.embedder, 10);
    CHECK(with.target_block.find("1. Combine the sugar, cocoa powder, and salt in a saucepan. "
                                 "Pour the sugar into a small saucepan.") != std::string::npos);

    auto without = build_prompt(PipelineVariant::BaseUseCase, cocoa, setup.state,
                                setup.embedder, 10);
    CHECK(without.target_block.find("Pour the sugar into a small saucepan.") ==
          std::string::npos);
}

TEST_CASE("blocks render in order and the prompt ends at PROGRAM:") {
    Setup setup;
    auto prompt = build_prompt(PipelineVariant::BaseUseCaseDesc, setup.tutorial("t_mop_floor"),
                               setup.state, setup.embedder, 2);
    std::string text = prompt.render();

    size_t system_pos = text.find("WorldObject");
    size_t use_case_pos = text.find("# Use Case of ");
    size_t first_demo_pos = text.find("TASK:");
    size_t target_pos = text.rfind("TASK:");
    REQUIRE(system_pos != std::string::npos);
    REQUIRE(use_case_pos != std::string::npos);
    REQUIRE(first_demo_pos != std::string::npos);
    CHECK(system_pos < use_case_pos);
    CHECK(use_case_pos < first_demo_pos);
    CHECK(first_demo_pos < target_pos);

    CHECK(text.size() >= 9);
    CHECK(text.substr(text.size() - 9) == "PROGRAM:\n");

    SUBCASE("demo count is min(k, pool demos)") {
        CHECK(count_occurrences(text, "TASK:\n") == 2 + 1);   // k=2 demos plus the target
        auto all = build_prompt(PipelineVariant::Base, setup.tutorial("t_mop_floor"),
                                setup.state, setup.embedder, 10);
        CHECK(count_occurrences(all.render(), "TASK:\n") == 3 + 1);   // 3 demos in pool
    }
    SUBCASE("every demonstration is a complete block") {
        CHECK(count_occurrences(text, "INSTRUCTIONS:\n") ==
              count_occurrences(text, "TASK:\n"));
        CHECK(count_occurrences(text, "PROGRAM:\n") == count_occurrences(text, "TASK:\n"));
    }
}

TEST_CASE("the most similar demonstration sits last, next to the target") {
    Setup setup;
    // The query tutorial is the seed demo's own task, so that demo must be
    // the most similar and therefore the last one rendered.
    auto prompt = build_prompt(PipelineVariant::Base, setup.tutorial("t_clean_sponge"),
                               setup.state, setup.embedder, 3);
    size_t sponge_pos = prompt.demo_block.find("How to Clean a Sponge");
    REQUIRE(sponge_pos != std::string::npos);
    CHECK(prompt.demo_block.find("How to Melt Chocolate in Microwave") < sponge_pos);
    CHECK(prompt.demo_block.find("How to Vacuum a Carpet") < sponge_pos);
}

TEST_CASE("identical inputs give byte-identical prompts") {
    Setup setup;
    auto one = build_prompt(PipelineVariant::BaseUseCaseDesc, setup.tutorial("t_hot_cocoa"),
                            setup.state, setup.embedder, 10);
    auto two = build_prompt(PipelineVariant::BaseUseCaseDesc, setup.tutorial("t_hot_cocoa"),
                            setup.state, setup.embedder, 10);
    CHECK(one.render() == two.render());
}

TEST_CASE("the soft budget drops least-similar demos first, then use cases") {
    Setup setup;
    PromptOptions tight;
    tight.char_budget = 100;   // impossible; everything droppable goes
    auto prompt = build_prompt(PipelineVariant::BaseUseCase, setup.tutorial("t_hot_cocoa"),
                               setup.state, setup.embedder, 10, tight);
    CHECK(count_occurrences(prompt.demo_block, "TASK:\n") == 1);   // never below one demo
    CHECK(prompt.use_case_block->empty());

    PromptOptions medium;
    auto full = build_prompt(PipelineVariant::BaseUseCase, setup.tutorial("t_hot_cocoa"),
                             setup.state, setup.embedder, 10);
    medium.char_budget = full.render().size() - 1;
    auto trimmed = build_prompt(PipelineVariant::BaseUseCase, setup.tutorial("t_hot_cocoa"),
                                setup.state, setup.embedder, 10, medium);
    CHECK(count_occurrences(trimmed.demo_block, "TASK:\n") == 2);
    CHECK(trimmed.use_case_block == full.use_case_block);
    CHECK(trimmed.render().size() <= medium.char_budget);
}

TEST_CASE("an unseeded pool cannot build prompts") {
    Setup setup;
    pool::PoolState empty;
    try {
        build_prompt(PipelineVariant::Base, setup.tutorial("t_hot_cocoa"), empty,
                     setup.embedder, 10);
        FAIL("expected EmptyPool");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyPool");
    }
}

TEST_CASE("variant names round-trip") {
    for (auto variant : {PipelineVariant::Base, PipelineVariant::BaseUseCase,
                         PipelineVariant::BaseUseCaseDesc})
        CHECK(variant_from_name(variant_name(variant)) == variant);
    CHECK_THROWS_AS(variant_from_name("bogus"), Error);
}
