#pragma once
#include "apiforge/corpus.hpp"
#include "apiforge/errors.hpp"
#include "apiforge/worldmodel.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace apiforge::agentlang {

// The agent-program notation is a closed subset: utils/objects_pool imports,
// receptacle statements, one `robot_program` function whose body holds
// comments, keyword-only calls, and while/if blocks over material-property
// comparisons. Anything else is a ParseError.

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& reason)
        : Error("ParseError",
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                    reason),
          line_(line), column_(column), reason_(reason) {}

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& reason() const { return reason_; }

private:
    int line_;
    int column_;
    std::string reason_;
};

enum class CommentKind { Step, Substep, Skip };

struct Comment {
    CommentKind kind = CommentKind::Substep;
    int step_number = 0;     // set for Step comments
    std::string text;        // comment text without the leading "# "

    bool operator==(const Comment&) const = default;
};

struct Value {
    enum class Kind { ObjectRef, Text, Number };
    Kind kind = Kind::Text;
    std::string payload;     // identifier, string contents, or number spelling

    bool operator==(const Value&) const = default;
};

struct Call {
    std::string callee;
    std::vector<std::pair<std::string, Value>> kwargs;

    bool operator==(const Call&) const = default;
};

struct Comparison {
    std::string object_id;
    std::string property_key;
    enum class Op { Eq, Ne };
    Op op = Op::Ne;
    Value literal;

    bool operator==(const Comparison&) const = default;
};

struct Condition {
    enum class Connective { None, And, Or };
    std::vector<Comparison> clauses;
    Connective connective = Connective::None;

    bool operator==(const Condition&) const = default;
};

struct Statement;

struct Loop {
    Condition condition;
    std::vector<Statement> body;

    bool operator==(const Loop&) const;
};

struct Conditional {
    Condition condition;
    std::vector<Statement> body;

    bool operator==(const Conditional&) const;
};

struct Statement {
    std::variant<Comment, Call, Loop, Conditional> node;
    int line = 0;            // 1-based source line, not part of structural equality

    bool operator==(const Statement& other) const { return node == other.node; }
};

enum class Relation { Receptacles, ReceptaclesOf };

struct ReceptacleStmt {
    std::string subject;     // x in x.receptacles.append(y)
    Relation relation = Relation::Receptacles;
    std::string object;      // y
    int line = 0;

    bool operator==(const ReceptacleStmt& other) const {
        return subject == other.subject && relation == other.relation && object == other.object;
    }
};

struct AgentProgram {
    std::vector<std::string> imports_apis;
    std::vector<std::string> imports_objects;
    std::vector<ReceptacleStmt> receptacle_stmts;
    std::vector<Statement> body;
    bool has_trailing_invocation = false;

    bool operator==(const AgentProgram&) const = default;
};

// Parses program text (imports through trailing invocation). Indentation in
// spaces, a consistent unit per program, determines nesting. Top-level
// comments and blank lines are permitted and not stored.
AgentProgram parse(const std::string& text);

// Canonical source form, 4-space indentation. parse(pretty_print(p)) == p.
std::string pretty_print(const AgentProgram& p);

struct CoverageResult {
    std::vector<int> missing;    // ascending step indices absent from the program

    bool ok() const { return missing.empty(); }
};

// ok iff every step index 1..n of the tutorial appears as a step comment.
CoverageResult check_step_coverage(const AgentProgram& p, const corpus::Tutorial& t);

struct CallSite {
    std::string callee;
    std::vector<std::pair<std::string, Value>> kwargs;
    std::optional<int> step;     // most recent preceding step-comment number
    int line = 0;
};

// Every Call at any nesting depth, once, in source order.
std::vector<CallSite> extract_calls(const AgentProgram& p);

struct UseCase {
    std::string api_name;
    std::string leading_comment;     // comment text without "# "
    std::string snippet;             // verbatim lines, comment through call
    std::string source_tutorial;
    int source_step = 0;

    bool operator==(const UseCase&) const = default;
};

// One UseCase per call site; the leading comment is the nearest comment above
// the call in the function body and the snippet is the verbatim line range.
// `source_text` must be the exact text parse() consumed. Throws
// Error("NoLeadingComment") for a call with no comment above it; the lenient
// variant silently drops such call sites instead (used when registering
// already-verified programs, which must not fail).
std::vector<UseCase> extract_use_cases(const AgentProgram& p, const std::string& source_text);
std::vector<UseCase> extract_use_cases_lenient(const AgentProgram& p,
                                               const std::string& source_text);

// The object graph a program implies: one WorldObject per imported object,
// wired by the receptacle statements. x.receptacles.append(y) puts x inside
// y; x.receptacles_of.append(y) puts y inside x.
std::map<std::string, worldmodel::WorldObject> build_world(const AgentProgram& p);

} // namespace apiforge::agentlang
