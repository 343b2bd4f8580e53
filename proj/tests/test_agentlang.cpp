#include "apiforge/agentlang.hpp"
#include "apiforge/textutil.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <algorithm>

using namespace apiforge;
using namespace apiforge::agentlang;
using testutil::read_fixture;

namespace {

const Loop* find_loop(const std::vector<Statement>& body) {
    for (const auto& stmt : body)
        if (const auto* loop = std::get_if<Loop>(&stmt.node)) return loop;
    return nullptr;
}

bool has_import(const std::vector<std::string>& imports, const std::string& name) {
    return std::find(imports.begin(), imports.end(), name) != imports.end();
}

} // namespace

TEST_CASE("the chocolate-melting program parses with its structure intact") {
    auto program = parse(read_fixture("listings/melt_chocolate.txt"));

    for (const char* name : {"find", "grab", "put", "put_back"})
        CHECK(has_import(program.imports_apis, name));
    CHECK(has_import(program.imports_objects, "chocolate_0"));

    REQUIRE(program.receptacle_stmts.size() == 1);
    CHECK(program.receptacle_stmts[0].subject == "faucet_0");
    CHECK(program.receptacle_stmts[0].relation == Relation::Receptacles);
    CHECK(program.receptacle_stmts[0].object == "sink_0");

    const Loop* loop = find_loop(program.body);
    REQUIRE(loop != nullptr);
    REQUIRE(loop->condition.clauses.size() == 1);
    const auto& clause = loop->condition.clauses[0];
    CHECK(clause.object_id == "chocolate_0");
    CHECK(clause.property_key == "form");
    CHECK(clause.op == Comparison::Op::Ne);
    CHECK(clause.literal == Value{Value::Kind::Text, "small pieces"});

    auto calls = extract_calls(program);
    auto called = [&](const std::string& name) {
        return std::any_of(calls.begin(), calls.end(),
                           [&](const CallSite& c) { return c.callee == name; });
    };
    CHECK(called("find"));
    CHECK(called("grab"));
    CHECK(called("chop"));
    CHECK(program.has_trailing_invocation);
}

TEST_CASE("empty input is missing the policy function") {
    try {
        parse("");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.reason().find("missing policy function") != std::string::npos);
    }
}

TEST_CASE("the wrapped feedback loop parses to a conditional on 'form'") {
    auto program = parse(read_fixture("listings/feedback_loop_wrapped.txt"));
    const Conditional* conditional = nullptr;
    for (const auto& stmt : program.body)
        if (const auto* c = std::get_if<Conditional>(&stmt.node)) conditional = c;
    REQUIRE(conditional != nullptr);
    REQUIRE(conditional->condition.clauses.size() == 1);
    CHECK(conditional->condition.clauses[0].op == Comparison::Op::Ne);
    CHECK(conditional->condition.clauses[0].property_key == "form");
    CHECK(conditional->body.size() == 5);
}

TEST_CASE("the wrapped base-API lines parse and use keywords everywhere") {
    auto program = parse(read_fixture("listings/base_apis_wrapped.txt"));
    auto calls = extract_calls(program);
    REQUIRE(calls.size() == 9);
    CHECK(calls[5].callee == "turn_on");
    REQUIRE(calls[5].kwargs.size() == 2);
    CHECK(calls[5].kwargs[1].first == "power");
    CHECK(calls[5].kwargs[1].second == Value{Value::Kind::Text, "high"});
    CHECK(calls[7].callee == "sleep");
    CHECK(calls[7].kwargs[0].second == Value{Value::Kind::Text, "300s"});
}

TEST_CASE("single mutations break each listing") {
    std::string listing = read_fixture("listings/melt_chocolate.txt");

    SUBCASE("dropped colon") {
        auto broken = listing;
        auto pos = broken.find("!= 'small pieces':");
        broken.erase(pos + 17, 1);
        CHECK_THROWS_AS(parse(broken), ParseError);
    }
    SUBCASE("positional argument") {
        auto broken = listing;
        auto pos = broken.find("find(obj=chocolate_0)");
        broken.replace(pos, 21, "find(chocolate_0)");
        try {
            parse(broken);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.reason().find("positional") != std::string::npos);
        }
    }
    SUBCASE("bad dedent") {
        auto broken = listing;
        auto pos = broken.find("    put_back(obj=knife_0)");
        broken.replace(pos, 25, "  put_back(obj=knife_0)");
        try {
            parse(broken);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.reason().find("indent") != std::string::npos);
        }
    }
    SUBCASE("unknown statement") {
        auto broken = listing;
        auto pos = broken.find("    put(obj=chocolate_0, target=bowl_0)");
        broken.insert(pos, "    total = 3\n");
        CHECK_THROWS_AS(parse(broken), ParseError);
    }
}

TEST_CASE("the trailing invocation must name the policy function exactly") {
    std::string body = "from utils import find\n"
                       "from objects_pool import cup_0\n"
                       "def robot_program():\n"
                       "    # 1. step\n"
                       "    find(obj=cup_0)\n";
    CHECK(parse(body + "robot_program()\n").has_trailing_invocation);
    CHECK_THROWS_AS(parse(body + "robot_program2()\n"), ParseError);
    CHECK_THROWS_AS(parse(body + "robot_program()\nrobot_program()\n"), ParseError);
}

TEST_CASE("unimported call-argument objects are parse errors") {
    CHECK_THROWS_AS(parse("from utils import find\n"
                          "def robot_program():\n"
                          "    # 1. step\n"
                          "    find(obj=ghost_0)\n"),
                    ParseError);
}

TEST_CASE("tabs in indentation are rejected") {
    CHECK_THROWS_AS(parse("from utils import find\n"
                          "from objects_pool import cup_0\n"
                          "def robot_program():\n"
                          "\tfind(obj=cup_0)\n"),
                    ParseError);
}

TEST_CASE("step coverage checks presence of every numbered comment") {
    auto two_step = testutil::make_tutorial("t", "How to T", {"First.", "Second."});
    auto program = parse(read_fixture("listings/melt_chocolate.txt"));

    SUBCASE("all steps present") { CHECK(check_step_coverage(program, two_step).ok()); }

    SUBCASE("a third step is reported missing") {
        auto three_step =
            testutil::make_tutorial("t", "How to T", {"First.", "Second.", "Third."});
        auto result = check_step_coverage(program, three_step);
        CHECK(result.missing == std::vector<int>{3});
    }

    SUBCASE("skip comments leave the numbered comment in place") {
        auto skipping = parse("from utils import find\n"
                              "from objects_pool import cup_0\n"
                              "def robot_program():\n"
                              "    # 1. Find the cup.\n"
                              "    find(obj=cup_0)\n"
                              "    # 2. Admire the cup.\n"
                              "    # skip this instruction\n");
        CHECK(check_step_coverage(skipping, two_step).ok());
    }
}

TEST_CASE("numbered-comment recognition") {
    auto program = parse("from utils import pour\n"
                         "from objects_pool import cup_0\n"
                         "def robot_program():\n"
                         "    # 1. Pour carefully.\n"
                         "    # 1.5 cups of water go in\n"
                         "    pour(obj=cup_0)\n"
                         "    # 12. Done.\n");
    std::vector<std::pair<CommentKind, int>> comments;
    for (const auto& stmt : program.body)
        if (const auto* c = std::get_if<Comment>(&stmt.node))
            comments.push_back({c->kind, c->step_number});
    REQUIRE(comments.size() == 3);
    CHECK(comments[0] == std::pair{CommentKind::Step, 1});
    CHECK(comments[1].first == CommentKind::Substep);   // "1.5" is not a step number
    CHECK(comments[2] == std::pair{CommentKind::Step, 12});
}

TEST_CASE("repeated step numbers inside loops demote to substeps") {
    auto program = parse("from utils import knead\n"
                         "from objects_pool import dough_0\n"
                         "def robot_program():\n"
                         "    # 1. Knead the dough.\n"
                         "    while dough_0.material_properties['texture'] != 'smooth':\n"
                         "        # 1. keep kneading\n"
                         "        knead(obj=dough_0)\n");
    auto calls = extract_calls(program);
    REQUIRE(calls.size() == 1);
    CHECK(calls[0].step == 1);

    int step_comments = 0;
    std::vector<const std::vector<Statement>*> stack{&program.body};
    while (!stack.empty()) {
        const auto* stmts = stack.back();
        stack.pop_back();
        for (const auto& stmt : *stmts) {
            if (const auto* c = std::get_if<Comment>(&stmt.node))
                step_comments += c->kind == CommentKind::Step ? 1 : 0;
            else if (const auto* l = std::get_if<Loop>(&stmt.node))
                stack.push_back(&l->body);
        }
    }
    CHECK(step_comments == 1);
}

TEST_CASE("extract_calls walks every nesting depth in source order") {
    auto listing = parse(read_fixture("listings/melt_chocolate.txt"));
    auto calls = extract_calls(listing);
    REQUIRE(!calls.empty());
    CHECK(calls[0].callee == "find");
    REQUIRE(calls[0].kwargs.size() == 1);
    CHECK(calls[0].kwargs[0].first == "obj");
    CHECK(calls[0].kwargs[0].second == Value{Value::Kind::ObjectRef, "chocolate_0"});
    CHECK(calls[0].step == 1);

    SUBCASE("calls inside loops are reported") {
        std::string text = "from utils import squeeze\n"
                           "from objects_pool import sponge_0\n"
                           "def robot_program():\n"
                           "    # 1. Squeeze.\n"
                           "    while sponge_0.material_properties['filled'] != 'empty':\n"
                           "        squeeze(obj=sponge_0)\n";
        auto calls_in_loop = extract_calls(parse(text));
        REQUIRE(calls_in_loop.size() == 1);
        CHECK(calls_in_loop[0].callee == "squeeze");
    }

    SUBCASE("a seven-call program agrees with the line-scan oracle") {
        std::string text = "from utils import find, grab, put, stir\n"
                           "from objects_pool import bowl_0, spoon_0, sugar_0\n"
                           "def robot_program():\n"
                           "    # 1. Mix the sugar.\n"
                           "    find(obj=bowl_0)\n"
                           "    grab(obj=spoon_0)\n"
                           "    put(obj=sugar_0, target=bowl_0)\n"
                           "    while bowl_0.material_properties['mixed'] != 'yes':\n"
                           "        stir(obj=bowl_0, tool=spoon_0)\n"
                           "        if bowl_0.material_properties['spilled'] == 'yes':\n"
                           "            grab(obj=spoon_0)\n"
                           "            put(obj=sugar_0, target=bowl_0)\n"
                           "    put(obj=spoon_0, target=bowl_0)\n"
                           "robot_program()\n";
        auto calls7 = extract_calls(parse(text));
        CHECK(calls7.size() == 7);
        CHECK(static_cast<int>(calls7.size()) == testutil::line_scan_call_count(text));
    }
}

TEST_CASE("extract_calls matches the line-scan oracle on every fixture program") {
    for (const char* name :
         {"listings/melt_chocolate.txt", "listings/use_cases_wrapped.txt",
          "listings/base_apis_wrapped.txt", "listings/feedback_loop_wrapped.txt"}) {
        std::string text = read_fixture(name);
        auto calls = extract_calls(parse(text));
        CHECK(static_cast<int>(calls.size()) == testutil::line_scan_call_count(text));
    }
}

TEST_CASE("use cases span the nearest comment through the call line") {
    std::string source = read_fixture("listings/use_cases_wrapped.txt");
    auto program = parse(source);
    auto cases = extract_use_cases(program, source);

    auto find_case = [&](const std::string& api) -> const UseCase& {
        for (const auto& use_case : cases)
            if (use_case.api_name == api) return use_case;
        FAIL("no use case for ", api);
        return cases.front();
    };

    const auto& squeeze = find_case("squeeze");
    CHECK(squeeze.leading_comment == "bring the sponge to the sink and squeeze out the water");
    auto squeeze_lines = split_lines(squeeze.snippet);
    REQUIRE(squeeze_lines.size() == 4);
    CHECK(trim(squeeze_lines[0]) ==
          "# bring the sponge to the sink and squeeze out the water");
    CHECK(squeeze_lines[1] == "    find(obj=sink_0)");
    CHECK(squeeze_lines.back().find("squeeze(obj=sponge_0, target=sink_0)") !=
          std::string::npos);

    const auto& insert = find_case("insert");
    CHECK(insert.leading_comment == "attach hose attachment to vacuum");
    CHECK(split_lines(insert.snippet).size() == 2);

    SUBCASE("every use case starts at a comment and ends at its call") {
        for (const auto& use_case : cases) {
            auto lines = split_lines(use_case.snippet);
            REQUIRE(!lines.empty());
            CHECK(trim(lines.front())[0] == '#');
            CHECK(lines.back().find(use_case.api_name + "(") != std::string::npos);
        }
    }
}

TEST_CASE("a call directly under its comment yields a two-line snippet") {
    std::string text = "from utils import wave\n"
                       "from objects_pool import hand_0\n"
                       "def robot_program():\n"
                       "    # 1. Wave hello.\n"
                       "    wave(obj=hand_0)\n";
    auto cases = extract_use_cases(parse(text), text);
    REQUIRE(cases.size() == 1);
    CHECK(split_lines(cases[0].snippet).size() == 2);
    CHECK(cases[0].source_step == 1);
}

TEST_CASE("a call with no comment above it has no use case") {
    std::string text = "from utils import find\n"
                       "from objects_pool import cup_0\n"
                       "def robot_program():\n"
                       "    find(obj=cup_0)\n"
                       "    # 1. done\n";
    auto program = parse(text);
    try {
        extract_use_cases(program, text);
        FAIL("expected NoLeadingComment");
    } catch (const Error& e) {
        CHECK(e.code() == "NoLeadingComment");
    }
    CHECK(extract_use_cases_lenient(program, text).empty());
}

TEST_CASE("pretty-print round trip preserves structure") {
    for (const char* name :
         {"listings/melt_chocolate.txt", "listings/use_cases_wrapped.txt",
          "listings/base_apis_wrapped.txt", "listings/feedback_loop_wrapped.txt"}) {
        auto program = parse(read_fixture(name));
        auto reparsed = parse(pretty_print(program));
        CHECK(reparsed == program);
        CHECK(pretty_print(reparsed) == pretty_print(program));
    }

    SUBCASE("two-space indentation normalizes to the same structure") {
        std::string two_space = "from utils import find\n"
                                "from objects_pool import cup_0\n"
                                "def robot_program():\n"
                                "  # 1. Find the cup.\n"
                                "  if cup_0.material_properties['clean'] == 'yes':\n"
                                "    find(obj=cup_0)\n";
        auto program = parse(two_space);
        CHECK(parse(pretty_print(program)) == program);
    }
}

TEST_CASE("build_world wires receptacle statements symmetrically") {
    auto program = parse(read_fixture("listings/melt_chocolate.txt"));
    auto world = build_world(program);
    REQUIRE(world.count("faucet_0") == 1);
    REQUIRE(world.count("sink_0") == 1);
    // faucet_0.receptacles.append(sink_0): the faucet sits in the sink
    CHECK(world.at("faucet_0").receptacles == std::vector<std::string>{"sink_0"});
    CHECK(world.at("sink_0").receptacles_of == std::vector<std::string>{"faucet_0"});
    CHECK(apiforge::worldmodel::receptacle_symmetry_holds(world));
    CHECK(world.count("chocolate_0") == 1);   // imported objects exist unwired

    SUBCASE("receptacles_of statements wire the other direction") {
        std::string text = "from utils import find\n"
                           "from objects_pool import drawer_0, key_0\n"
                           "drawer_0.receptacles_of.append(key_0)\n"
                           "def robot_program():\n"
                           "    # 1. open the drawer\n"
                           "    find(obj=drawer_0)\n";
        auto world2 = build_world(parse(text));
        CHECK(world2.at("key_0").receptacles == std::vector<std::string>{"drawer_0"});
        CHECK(world2.at("drawer_0").receptacles_of == std::vector<std::string>{"key_0"});
    }
}

namespace {

// Generates random but grammatical program text: imports, receptacle
// statements, step/substep/skip comments, keyword-only calls with mixed
// value kinds, and nested while/if blocks.
struct ProgramGenerator {
    std::mt19937_64 gen;
    std::vector<std::string> objects;
    std::vector<std::string> apis;

    explicit ProgramGenerator(std::uint64_t seed) : gen(seed) {
        for (int i = 0; i < 5; ++i) objects.push_back("object_" + std::to_string(i));
        for (const char* name : {"find", "grab", "scrub", "pour", "fold"}) apis.push_back(name);
    }

    size_t pick(size_t bound) { return gen() % bound; }

    std::string value() {
        switch (pick(4)) {
        case 0: return objects[pick(objects.size())];
        case 1: return "'setting " + std::to_string(pick(30)) + "'";
        case 2: return "\"" + std::to_string(pick(900)) + "s\"";
        default: {
            const char* spellings[] = {"3", "-2", "0.5", "12.75"};
            return spellings[pick(4)];
        }
        }
    }

    std::string call(int indent_level) {
        std::string line(static_cast<size_t>(indent_level) * 4, ' ');
        line += apis[pick(apis.size())] + "(";
        size_t args = 1 + pick(3);
        for (size_t i = 0; i < args; ++i) {
            if (i) line += ", ";
            line += "arg" + std::to_string(i) + "=" + value();
        }
        return line + ")\n";
    }

    std::string comment(int indent_level, int step_number) {
        std::string line(static_cast<size_t>(indent_level) * 4, ' ');
        if (step_number > 0) return line + "# " + std::to_string(step_number) + ". do it\n";
        switch (pick(3)) {
        case 0: return line + "# skip this instruction\n";
        case 1: return line + "# handle piece " + std::to_string(pick(40)) + "\n";
        default: return line + "# 1.5 parts of the mixture\n";   // not a step comment
        }
    }

    std::string condition_header(int indent_level, bool loop) {
        std::string line(static_cast<size_t>(indent_level) * 4, ' ');
        line += loop ? "while " : "if ";
        size_t clauses = 1 + pick(2);
        const char* joiner = pick(2) ? " and " : " or ";
        for (size_t i = 0; i < clauses; ++i) {
            if (i) line += joiner;
            line += objects[pick(objects.size())] + ".material_properties['state" +
                    std::to_string(pick(5)) + "'] " + (pick(2) ? "==" : "!=") + " " +
                    (pick(2) ? "'ready'" : "4");
        }
        return line + ":\n";
    }

    void block(std::string& out, int level, int depth) {
        size_t statements = 1 + pick(3);
        for (size_t i = 0; i < statements; ++i) {
            switch (pick(depth < 3 ? 4 : 3)) {
            case 0: out += comment(level, 0); break;
            case 1:
            case 2: out += call(level); break;
            default:
                out += condition_header(level, pick(2) == 0);
                block(out, level + 1, depth + 1);
            }
        }
        if (pick(4) == 0) out += "\n";   // stray blank line
    }

    std::string program(int steps) {
        std::string out = "from utils import ";
        for (size_t i = 0; i < apis.size(); ++i) out += (i ? ", " : "") + apis[i];
        out += "\nfrom objects_pool import ";
        for (size_t i = 0; i < objects.size(); ++i) out += (i ? ", " : "") + objects[i];
        out += "\n";
        if (pick(2))
            out += objects[0] + (pick(2) ? ".receptacles.append(" : ".receptacles_of.append(") +
                   objects[1] + ")\n";
        out += "def robot_program():\n";
        for (int s = 1; s <= steps; ++s) {
            out += comment(1, s);
            block(out, 1, 1);
        }
        if (pick(2)) out += "robot_program()\n";
        return out;
    }
};

} // namespace

TEST_CASE("random grammatical programs round-trip and agree with the oracle") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        ProgramGenerator generator(seed * 7919);
        int steps = 1 + static_cast<int>(seed % 4);
        std::string text = generator.program(steps);
        CAPTURE(seed);

        AgentProgram program = parse(text);
        CHECK(parse(pretty_print(program)) == program);

        auto calls = extract_calls(program);
        auto scanned = testutil::line_scan_call_names(text);
        std::map<std::string, int> counted;
        for (const auto& call : calls) counted[call.callee] += 1;
        CHECK(counted == scanned);

        auto tutorial = testutil::make_tutorial(
            "gen", "How to Generate", std::vector<std::string>(steps, "Do it."));
        CHECK(check_step_coverage(program, tutorial).ok());

        for (const auto& use_case : extract_use_cases_lenient(program, text)) {
            auto lines = split_lines(use_case.snippet);
            REQUIRE(!lines.empty());
            CHECK(trim(lines.front())[0] == '#');
            CHECK(lines.back().find(use_case.api_name + "(") != std::string::npos);
        }
    }
}

TEST_CASE("carriage returns in generated text do not break parsing") {
    std::string unix_text = testutil::read_fixture("listings/melt_chocolate.txt");
    std::string crlf;
    for (char c : unix_text) {
        if (c == '\n') crlf += '\r';
        crlf += c;
    }
    CHECK(parse(crlf) == parse(unix_text));
}

TEST_CASE("double-quoted strings keep their quote kind through printing") {
    std::string text = "from utils import say\n"
                       "from objects_pool import radio_0\n"
                       "def robot_program():\n"
                       "    # 1. Speak.\n"
                       "    say(obj=radio_0, text=\"it's ready\")\n";
    auto program = parse(text);
    auto printed = pretty_print(program);
    CHECK(printed.find("\"it's ready\"") != std::string::npos);
    CHECK(parse(printed) == program);
}
