#include "apiforge/genclient.hpp"
#include "apiforge/digest.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/textutil.hpp"
#include "testutil.hpp"

#include <doctest.h>

using namespace apiforge;
using namespace apiforge::genclient;

namespace {

const std::string kValidProgram = "from utils import find, wipe\n"
                                  "from objects_pool import counter_0, towel_0\n"
                                  "def robot_program():\n"
                                  "    # 1. Wipe the counter.\n"
                                  "    find(obj=counter_0)\n"
                                  "    wipe(obj=counter_0, tool=towel_0)\n"
                                  "robot_program()\n";

corpus::Tutorial one_step_tutorial() {
    return testutil::make_tutorial("t_wipe", "How to Wipe a Counter", {"Wipe the counter."});
}

} // namespace

TEST_CASE("extract_program_section finds the marker") {
    std::string completion = "TASK:\nHow to Wipe a Counter\nINSTRUCTIONS:\n"
                             "1. Wipe the counter.\nPROGRAM:\n" +
                             kValidProgram;
    CHECK(extract_program_section(completion) == kValidProgram);

    SUBCASE("bare code passes through unchanged") {
        CHECK(extract_program_section(kValidProgram) == kValidProgram);
    }
    SUBCASE("code fences are stripped") {
        std::string fenced = "```python\n" + kValidProgram + "```\n";
        CHECK(extract_program_section(fenced) == kValidProgram);

        std::string fenced_with_marker = "```\nPROGRAM:\n" + kValidProgram + "```\n";
        CHECK(extract_program_section(fenced_with_marker) == kValidProgram);
    }
}

TEST_CASE("rejection sampling accepts the first verified completion") {
    auto tutorial = one_step_tutorial();

    SUBCASE("invalid then valid uses two attempts") {
        MockBackend mock({"def robot_program(:\n    broken", kValidProgram});
        auto outcome = generate_with_rejection(mock, "prompt", tutorial, 3, {0.0, 0.3, 0.7});
        REQUIRE(outcome.accepted());
        CHECK(outcome.program->attempts_used == 2);
        CHECK(outcome.program->source_text == kValidProgram);
        REQUIRE(outcome.failure_reasons.size() == 1);
        CHECK(outcome.failure_reasons[0].rfind("ParseError", 0) == 0);
    }
    SUBCASE("persistent missing steps exhaust the budget") {
        auto three_steps = testutil::make_tutorial(
            "t3", "How to Do Three Things", {"First.", "Second.", "Third."});
        std::string missing_third = "from utils import find\n"
                                    "from objects_pool import cup_0\n"
                                    "def robot_program():\n"
                                    "    # 1. First.\n"
                                    "    find(obj=cup_0)\n"
                                    "    # 2. Second.\n"
                                    "    find(obj=cup_0)\n";
        MockBackend mock({missing_third, missing_third, missing_third});
        auto outcome = generate_with_rejection(mock, "prompt", three_steps, 3, {0.0, 0.3, 0.7});
        CHECK_FALSE(outcome.accepted());
        CHECK(outcome.attempts_used == 3);
        REQUIRE(outcome.failure_reasons.size() == 3);
        for (const auto& reason : outcome.failure_reasons)
            CHECK(reason == "MissingSteps([3])");
    }
    SUBCASE("a verified program satisfies both predicates") {
        MockBackend mock({kValidProgram});
        auto outcome = generate_with_rejection(mock, "prompt", tutorial, 1, {0.0});
        REQUIRE(outcome.accepted());
        auto reparsed = agentlang::parse(outcome.program->source_text);
        CHECK(reparsed == outcome.program->program);
        CHECK(agentlang::check_step_coverage(reparsed, tutorial).ok());
    }
    SUBCASE("schedule shorter than the attempt budget is a usage error") {
        MockBackend mock({kValidProgram});
        CHECK_THROWS_AS(generate_with_rejection(mock, "prompt", tutorial, 3, {0.0}), Error);
    }
}

TEST_CASE("cassettes replay recorded completions by prompt digest") {
    testutil::TempDir dir("cassette");
    std::string path = dir.file("run.jsonl");

    {
        auto mock = std::make_shared<MockBackend>(
            std::vector<std::string>{"first completion", "second completion"});
        RecordingBackend recorder(mock, path);
        CHECK(recorder.generate("prompt A", 0.0) == "first completion");
        CHECK(recorder.generate("prompt B", 0.3) == "second completion");
    }

    SUBCASE("replay returns identical bytes, consuming in order") {
        ReplayBackend replay(path);
        CHECK(replay.generate("prompt B", 0.3) == "second completion");
        CHECK(replay.generate("prompt A", 0.0) == "first completion");
    }
    SUBCASE("repeated prompts consume successive records") {
        auto mock = std::make_shared<MockBackend>(
            std::vector<std::string>{"take one", "take two"});
        RecordingBackend recorder(mock, path);
        recorder.generate("same prompt", 0.0);
        recorder.generate("same prompt", 0.3);

        ReplayBackend replay(path);
        CHECK(replay.generate("same prompt", 0.0) == "take one");
        CHECK(replay.generate("same prompt", 0.3) == "take two");
        try {
            replay.generate("same prompt", 0.7);
            FAIL("expected CassetteMiss");
        } catch (const Error& e) {
            CHECK(e.code() == "CassetteMiss");
        }
    }
    SUBCASE("a digest miss is an error, never a fallthrough") {
        ReplayBackend replay(path);
        CHECK_THROWS_AS(replay.generate("never recorded", 0.0), Error);
    }
    SUBCASE("recorded digests match the prompt digest") {
        auto records = load_cassette(path);
        REQUIRE(records.size() == 2);
        CHECK(records[0].prompt_digest == digest_hex("prompt A"));
        CHECK(records[0].temperature == 0.0);
        CHECK(records[1].prompt_digest == digest_hex("prompt B"));
    }
}

TEST_CASE("replay issues zero calls to the recorded backend") {
    // Counting double around the backend that originally served the run.
    class CountingBackend : public GenerationBackend {
    public:
        explicit CountingBackend(std::vector<std::string> completions)
            : inner_(std::move(completions)) {}
        std::string name() const override { return "counting"; }
        std::string generate(const std::string& prompt, double temperature) override {
            ++calls;
            return inner_.generate(prompt, temperature);
        }
        int calls = 0;

    private:
        MockBackend inner_;
    };

    testutil::TempDir dir("replay_zero");
    std::string path = dir.file("cassette.jsonl");
    auto counting = std::make_shared<CountingBackend>(
        std::vector<std::string>{"completion one", "completion two"});
    {
        RecordingBackend recorder(counting, path);
        recorder.generate("alpha", 0.0);
        recorder.generate("beta", 0.0);
    }
    CHECK(counting->calls == 2);

    ReplayBackend replay(path);
    CHECK(replay.generate("alpha", 0.0) == "completion one");
    CHECK(replay.generate("beta", 0.0) == "completion two");
    CHECK(counting->calls == 2);   // untouched by the replay
}

TEST_CASE("the scripted backend keys completions on the target task title") {
    ScriptedBackend scripted =
        ScriptedBackend::from_file(testutil::fixture_path("cli_completions.txt"));

    std::string prompt = "TASK:\nHow to Clean a Sponge\nINSTRUCTIONS:\n"
                         "1. Rinse the sponge under the faucet.\nPROGRAM:\n";
    std::string completion = scripted.generate(prompt, 0.0);
    CHECK(completion.find("squeeze(obj=sponge_0, target=sink_0)") != std::string::npos);

    SUBCASE("the last TASK: block wins over demonstration blocks") {
        std::string with_demo =
            "TASK:\nHow to Melt Chocolate in Microwave\nINSTRUCTIONS:\n...\nPROGRAM:\n"
            "def robot_program():\n    pass\n\n" +
            prompt;
        std::string again = scripted.generate(with_demo, 0.0);
        CHECK(again == completion);   // the sponge completion, not the chocolate one
    }
    SUBCASE("unknown tasks are script misses") {
        CHECK_THROWS_AS(scripted.generate("TASK:\nHow to Levitate\nPROGRAM:\n", 0.0), Error);
    }
}
