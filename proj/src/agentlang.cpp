#include "apiforge/agentlang.hpp"
#include "apiforge/textutil.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace apiforge::agentlang {

bool Loop::operator==(const Loop& other) const {
    return condition == other.condition && body == other.body;
}

bool Conditional::operator==(const Conditional& other) const {
    return condition == other.condition && body == other.body;
}

namespace {

// ---------------------------------------------------------------- tokens

struct Token {
    enum class Kind { Ident, String, Number, Symbol, End };
    Kind kind = Kind::End;
    std::string text;
    int column = 0;
};

class LineLexer {
public:
    LineLexer(const std::string& content, int line, int column_offset)
        : src_(content), line_(line), offset_(column_offset) {}

    Token next() {
        skip_spaces();
        Token tok;
        tok.column = column();
        if (pos_ >= src_.size()) {
            tok.kind = Token::Kind::End;
            return tok;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok.kind = Token::Kind::Ident;
            tok.text = src_.substr(start, pos_ - start);
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            size_t start = pos_;
            if (c == '-') ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '.') {
                ++pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
            tok.kind = Token::Kind::Number;
            tok.text = src_.substr(start, pos_ - start);
            return tok;
        }
        if (c == '\'' || c == '"') {
            size_t end = src_.find(c, pos_ + 1);
            if (end == std::string::npos)
                throw ParseError(line_, tok.column, "unterminated string literal");
            tok.kind = Token::Kind::String;
            tok.text = src_.substr(pos_ + 1, end - pos_ - 1);
            pos_ = end + 1;
            return tok;
        }
        if (c == '=' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            tok.kind = Token::Kind::Symbol;
            tok.text = "==";
            pos_ += 2;
            return tok;
        }
        if (c == '!' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            tok.kind = Token::Kind::Symbol;
            tok.text = "!=";
            pos_ += 2;
            return tok;
        }
        if (std::string("()[]=,.:").find(c) != std::string::npos) {
            tok.kind = Token::Kind::Symbol;
            tok.text = std::string(1, c);
            ++pos_;
            return tok;
        }
        throw ParseError(line_, tok.column, std::string("unexpected character '") + c + "'");
    }

    Token peek() {
        size_t saved = pos_;
        Token tok = next();
        pos_ = saved;
        return tok;
    }

    void expect_symbol(const std::string& text, const std::string& what) {
        Token tok = next();
        if (tok.kind != Token::Kind::Symbol || tok.text != text)
            throw ParseError(line_, tok.column, "expected '" + text + "' " + what);
    }

    void expect_end(const std::string& what) {
        Token tok = next();
        if (tok.kind != Token::Kind::End)
            throw ParseError(line_, tok.column, "unexpected trailing text " + what);
    }

    int line() const { return line_; }

private:
    void skip_spaces() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }
    int column() const { return offset_ + static_cast<int>(pos_) + 1; }

    const std::string& src_;
    int line_;
    int offset_;
    size_t pos_ = 0;
};

// ---------------------------------------------------------------- lines

struct RawLine {
    int number = 0;      // 1-based
    int indent = 0;      // leading spaces
    bool blank = true;
    std::string content; // text after indentation
};

std::vector<RawLine> scan_lines(const std::string& text) {
    std::vector<RawLine> out;
    auto lines = split_lines(text);
    for (size_t i = 0; i < lines.size(); ++i) {
        RawLine raw;
        raw.number = static_cast<int>(i) + 1;
        std::string& line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();   // CRLF input
        size_t p = 0;
        while (p < line.size() && line[p] == ' ') ++p;
        if (p < line.size() && line[p] == '\t')
            throw ParseError(raw.number, static_cast<int>(p) + 1,
                             "inconsistent indentation: tab character in indent");
        raw.indent = static_cast<int>(p);
        raw.content = line.substr(p);
        raw.blank = trim(raw.content).empty();
        out.push_back(std::move(raw));
    }
    return out;
}

bool is_comment(const RawLine& line) { return !line.blank && line.content[0] == '#'; }

std::string comment_text(const RawLine& line) {
    std::string text = line.content.substr(1);
    if (!text.empty() && text[0] == ' ') text = text.substr(1);
    return text;
}

// "<int>." prefix followed by end or whitespace marks a numbered comment.
std::optional<int> numbered_comment(const std::string& text) {
    size_t p = 0;
    while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
    if (p == 0 || p >= text.size() || text[p] != '.') return std::nullopt;
    if (p + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[p + 1])))
        return std::nullopt;
    return std::stoi(text.substr(0, p));
}

constexpr const char* kSkipComment = "skip this instruction";
constexpr const char* kPolicyName = "robot_program";

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(const std::string& text) : lines_(scan_lines(text)) {}

    AgentProgram run() {
        parse_preamble();
        parse_function();
        parse_epilogue();
        check_object_imports();
        return std::move(program_);
    }

private:
    const RawLine* current() const { return pos_ < lines_.size() ? &lines_[pos_] : nullptr; }

    void skip_blanks() {
        while (pos_ < lines_.size() && lines_[pos_].blank) ++pos_;
    }

    [[noreturn]] void fail(const RawLine& line, const std::string& reason, int column = 0) {
        throw ParseError(line.number, column > 0 ? column : line.indent + 1, reason);
    }

    bool line_starts_with_keyword(const RawLine& line, const std::string& kw) const {
        return starts_with(line.content, kw) &&
               (line.content.size() == kw.size() ||
                !(std::isalnum(static_cast<unsigned char>(line.content[kw.size()])) ||
                  line.content[kw.size()] == '_'));
    }

    void parse_preamble() {
        while (true) {
            skip_blanks();
            const RawLine* line = current();
            if (!line) {
                int at = lines_.empty() ? 1 : lines_.back().number;
                throw ParseError(at, 1, "missing policy function '" + std::string(kPolicyName) +
                                            "'");
            }
            if (line->indent != 0)
                fail(*line, "inconsistent indentation: unexpected indent before the "
                            "function definition");
            if (is_comment(*line)) {     // top-level comments are allowed, not stored
                ++pos_;
                continue;
            }
            if (line_starts_with_keyword(*line, "from")) {
                parse_import(*line);
                ++pos_;
                continue;
            }
            if (line_starts_with_keyword(*line, "def")) return;
            if (auto stmt = try_receptacle(*line)) {
                program_.receptacle_stmts.push_back(*stmt);
                ++pos_;
                continue;
            }
            fail(*line, "unknown statement form before the function definition: '" +
                            line->content + "'");
        }
    }

    void parse_import(const RawLine& line) {
        LineLexer lex(line.content, line.number, line.indent);
        lex.next();                       // 'from'
        Token module = lex.next();
        if (module.kind != Token::Kind::Ident)
            fail(line, "expected module name after 'from'", module.column);
        std::vector<std::string>* target = nullptr;
        if (module.text == "utils") target = &program_.imports_apis;
        else if (module.text == "objects_pool") target = &program_.imports_objects;
        else fail(line, "unknown import module '" + module.text + "'", module.column);

        Token kw = lex.next();
        if (kw.kind != Token::Kind::Ident || kw.text != "import")
            fail(line, "expected 'import'", kw.column);
        while (true) {
            Token name = lex.next();
            if (name.kind != Token::Kind::Ident)
                fail(line, "expected identifier in import list", name.column);
            if (std::find(target->begin(), target->end(), name.text) == target->end())
                target->push_back(name.text);
            Token sep = lex.next();
            if (sep.kind == Token::Kind::End) return;
            if (sep.kind != Token::Kind::Symbol || sep.text != ",")
                fail(line, "expected ',' in import list", sep.column);
        }
    }

    std::optional<ReceptacleStmt> try_receptacle(const RawLine& line) {
        // x.receptacles.append(y) | x.receptacles_of.append(y)
        LineLexer lex(line.content, line.number, line.indent);
        Token subject = lex.next();
        if (subject.kind != Token::Kind::Ident) return std::nullopt;
        Token dot = lex.peek();
        if (dot.kind != Token::Kind::Symbol || dot.text != ".") return std::nullopt;
        lex.next();
        Token attr = lex.next();
        if (attr.kind != Token::Kind::Ident) fail(line, "unknown statement form", attr.column);
        Relation relation;
        if (attr.text == "receptacles") relation = Relation::Receptacles;
        else if (attr.text == "receptacles_of") relation = Relation::ReceptaclesOf;
        else fail(line, "unknown attribute '" + attr.text + "' (only receptacle statements "
                        "may use attribute access)", attr.column);
        lex.expect_symbol(".", "in receptacle statement");
        Token method = lex.next();
        if (method.kind != Token::Kind::Ident || method.text != "append")
            fail(line, "expected 'append' in receptacle statement", method.column);
        lex.expect_symbol("(", "in receptacle statement");
        Token object = lex.next();
        if (object.kind != Token::Kind::Ident)
            fail(line, "expected object identifier in receptacle statement", object.column);
        lex.expect_symbol(")", "in receptacle statement");
        lex.expect_end("after receptacle statement");
        return ReceptacleStmt{subject.text, relation, object.text, line.number};
    }

    void parse_function() {
        const RawLine& def_line = *current();
        LineLexer lex(def_line.content, def_line.number, def_line.indent);
        lex.next();                       // 'def'
        Token name = lex.next();
        if (name.kind != Token::Kind::Ident)
            fail(def_line, "expected function name after 'def'", name.column);
        if (name.text != kPolicyName)
            fail(def_line, "policy function must be named '" + std::string(kPolicyName) + "'",
                 name.column);
        lex.expect_symbol("(", "after function name");
        lex.expect_symbol(")", "after function name");
        lex.expect_symbol(":", "after function signature");
        lex.expect_end("after function signature");
        ++pos_;

        skip_blanks();
        const RawLine* first = current();
        if (!first || first->indent == 0) {
            int at = first ? first->number : (lines_.empty() ? 1 : lines_.back().number);
            throw ParseError(at, 1, "empty function body");
        }
        indent_unit_ = first->indent;
        program_.body = parse_block(1);
        if (program_.body.empty())
            throw ParseError(first->number, 1, "empty function body");
    }

    int classify_indent(const RawLine& line) {
        if (line.indent % indent_unit_ != 0)
            fail(line, "inconsistent indentation: " + std::to_string(line.indent) +
                           " is not a multiple of the " + std::to_string(indent_unit_) +
                           "-space unit");
        return line.indent / indent_unit_;
    }

    std::vector<Statement> parse_block(int level) {
        std::vector<Statement> stmts;
        while (true) {
            skip_blanks();
            const RawLine* line = current();
            if (!line) return stmts;
            if (line->indent == 0 && !is_comment(*line)) return stmts;   // function ended
            int line_level = classify_indent(*line);
            if (line_level < level) return stmts;                        // dedent
            if (line_level > level)
                fail(*line, "inconsistent indentation: unexpected indent");
            if (!is_comment(*line)) {
                if (auto receptacle = try_receptacle_in_body(*line)) {
                    // World wiring, not a primitive action; hoisted out of the body.
                    program_.receptacle_stmts.push_back(*receptacle);
                    ++pos_;
                    continue;
                }
            }
            stmts.push_back(parse_statement(*line, level));
        }
    }

    Statement parse_statement(const RawLine& line, int level) {
        Statement stmt;
        stmt.line = line.number;
        if (is_comment(line)) {
            stmt.node = parse_comment(line);
            ++pos_;
            return stmt;
        }
        if (line_starts_with_keyword(line, "while") || line_starts_with_keyword(line, "if")) {
            bool is_loop = line.content[0] == 'w';
            Condition condition = parse_condition_line(line);
            ++pos_;
            std::vector<Statement> body = parse_nested_block(line, level);
            if (is_loop) stmt.node = Loop{std::move(condition), std::move(body)};
            else stmt.node = Conditional{std::move(condition), std::move(body)};
            return stmt;
        }
        if (line_starts_with_keyword(line, "def"))
            fail(line, "unknown statement form: nested function definition");
        if (line_starts_with_keyword(line, "from"))
            fail(line, "unknown statement form: import inside the function body");
        stmt.node = parse_call(line);
        ++pos_;
        return stmt;
    }

    std::optional<ReceptacleStmt> try_receptacle_in_body(const RawLine& line) {
        LineLexer lex(line.content, line.number, line.indent);
        Token first = lex.next();
        if (first.kind != Token::Kind::Ident) return std::nullopt;
        Token dot = lex.peek();
        if (dot.kind != Token::Kind::Symbol || dot.text != ".") return std::nullopt;
        return try_receptacle(line);
    }

    std::vector<Statement> parse_nested_block(const RawLine& header, int level) {
        skip_blanks();
        const RawLine* first = current();
        if (!first || (first->indent == 0 && !is_comment(*first)))
            fail(header, "empty block after '" + first_word(header) + "'");
        int first_level = classify_indent(*first);
        if (first_level != level + 1) {
            if (first_level <= level)
                fail(header, "empty block after '" + first_word(header) + "'");
            fail(*first, "inconsistent indentation: unexpected indent");
        }
        std::vector<Statement> body = parse_block(level + 1);
        if (body.empty()) fail(header, "empty block after '" + first_word(header) + "'");
        return body;
    }

    static std::string first_word(const RawLine& line) {
        size_t p = line.content.find_first_of(" (");
        return line.content.substr(0, p);
    }

    Comment parse_comment(const RawLine& line) {
        Comment comment;
        comment.text = comment_text(line);
        if (auto number = numbered_comment(comment.text); number && *number >= 1 &&
            !seen_steps_.count(*number)) {
            comment.kind = CommentKind::Step;
            comment.step_number = *number;
            seen_steps_.insert(*number);
        } else if (trim(comment.text) == kSkipComment) {
            comment.kind = CommentKind::Skip;
        } else {
            comment.kind = CommentKind::Substep;   // repeated numbers demote here
        }
        return comment;
    }

    Condition parse_condition_line(const RawLine& line) {
        LineLexer lex(line.content, line.number, line.indent);
        lex.next();                       // 'while' | 'if'
        Condition condition;
        while (true) {
            condition.clauses.push_back(parse_comparison(lex, line));
            Token tok = lex.next();
            if (tok.kind == Token::Kind::Symbol && tok.text == ":") break;
            if (tok.kind == Token::Kind::Ident && (tok.text == "and" || tok.text == "or")) {
                auto connective = tok.text == "and" ? Condition::Connective::And
                                                    : Condition::Connective::Or;
                if (condition.connective == Condition::Connective::None)
                    condition.connective = connective;
                else if (condition.connective != connective)
                    fail(line, "malformed condition: mixed 'and'/'or' connectives", tok.column);
                continue;
            }
            fail(line, "expected ':' after condition", tok.column);
        }
        lex.expect_end("after ':'");
        return condition;
    }

    Comparison parse_comparison(LineLexer& lex, const RawLine& line) {
        Comparison cmp;
        Token obj = lex.next();
        if (obj.kind != Token::Kind::Ident)
            fail(line, "malformed condition: expected object identifier", obj.column);
        cmp.object_id = obj.text;
        lex.expect_symbol(".", "in condition");
        Token attr = lex.next();
        if (attr.kind != Token::Kind::Ident || attr.text != "material_properties")
            fail(line, "malformed condition: state checks go through material_properties",
                 attr.column);
        lex.expect_symbol("[", "in condition");
        Token key = lex.next();
        if (key.kind != Token::Kind::String)
            fail(line, "malformed condition: property key must be a string", key.column);
        cmp.property_key = key.text;
        lex.expect_symbol("]", "in condition");
        Token op = lex.next();
        if (op.kind == Token::Kind::Symbol && op.text == "==") cmp.op = Comparison::Op::Eq;
        else if (op.kind == Token::Kind::Symbol && op.text == "!=") cmp.op = Comparison::Op::Ne;
        else fail(line, "malformed condition: expected '==' or '!='", op.column);
        Token lit = lex.next();
        if (lit.kind == Token::Kind::String) cmp.literal = {Value::Kind::Text, lit.text};
        else if (lit.kind == Token::Kind::Number) cmp.literal = {Value::Kind::Number, lit.text};
        else fail(line, "malformed condition: comparison literal must be a string or number",
                  lit.column);
        return cmp;
    }

    Call parse_call(const RawLine& line) {
        LineLexer lex(line.content, line.number, line.indent);
        Token callee = lex.next();
        if (callee.kind != Token::Kind::Ident)
            fail(line, "unknown statement form: '" + line.content + "'", callee.column);
        if (callee.text == kPolicyName)
            fail(line, "unknown statement form: the policy function may not call itself",
                 callee.column);
        Call call;
        call.callee = callee.text;
        lex.expect_symbol("(", "in call");
        Token tok = lex.next();
        if (tok.kind == Token::Kind::Symbol && tok.text == ")") {
            lex.expect_end("after call");
            return call;
        }
        while (true) {
            if (tok.kind != Token::Kind::Ident)
                fail(line, "positional call argument: arguments must be keyword=value",
                     tok.column);
            Token eq = lex.next();
            if (!(eq.kind == Token::Kind::Symbol && eq.text == "="))
                fail(line, "positional call argument: arguments must be keyword=value",
                     tok.column);
            Token value = lex.next();
            Value parsed;
            if (value.kind == Token::Kind::Ident) parsed = {Value::Kind::ObjectRef, value.text};
            else if (value.kind == Token::Kind::String) parsed = {Value::Kind::Text, value.text};
            else if (value.kind == Token::Kind::Number)
                parsed = {Value::Kind::Number, value.text};
            else fail(line, "expected argument value", value.column);
            call.kwargs.emplace_back(tok.text, parsed);
            Token sep = lex.next();
            if (sep.kind == Token::Kind::Symbol && sep.text == ")") break;
            if (!(sep.kind == Token::Kind::Symbol && sep.text == ","))
                fail(line, "expected ',' or ')' in call arguments", sep.column);
            tok = lex.next();
        }
        lex.expect_end("after call");
        return call;
    }

    void parse_epilogue() {
        while (true) {
            skip_blanks();
            const RawLine* line = current();
            if (!line) break;
            if (line->indent != 0)
                fail(*line, "inconsistent indentation: unexpected indent after the function");
            if (is_comment(*line)) {
                ++pos_;
                continue;
            }
            if (line_starts_with_keyword(*line, "def"))
                fail(*line, "exactly one policy function definition is allowed");
            if (starts_with(line->content, kPolicyName)) {
                LineLexer lex(line->content, line->number, line->indent);
                Token name = lex.next();
                if (name.kind != Token::Kind::Ident || name.text != kPolicyName)
                    fail(*line, "unknown statement form after the function: '" +
                                    line->content + "'");
                if (program_.has_trailing_invocation)
                    fail(*line, "duplicate trailing invocation");
                lex.expect_symbol("(", "in trailing invocation");
                lex.expect_symbol(")", "in trailing invocation");
                lex.expect_end("after trailing invocation");
                program_.has_trailing_invocation = true;
                ++pos_;
                continue;
            }
            fail(*line, "unknown statement form after the function: '" + line->content + "'");
        }
    }

    void check_object_imports() {
        std::unordered_set<std::string> objects(program_.imports_objects.begin(),
                                                program_.imports_objects.end());
        check_object_imports_in(program_.body, objects);
    }

    void check_object_imports_in(const std::vector<Statement>& stmts,
                                 const std::unordered_set<std::string>& objects) {
        for (const auto& stmt : stmts) {
            if (const auto* call = std::get_if<Call>(&stmt.node)) {
                for (const auto& [name, value] : call->kwargs)
                    if (value.kind == Value::Kind::ObjectRef && !objects.count(value.payload))
                        throw ParseError(stmt.line, 1,
                                         "unknown object identifier '" + value.payload +
                                             "' (not imported from objects_pool)");
            } else if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
                check_object_imports_in(loop->body, objects);
            } else if (const auto* cond = std::get_if<Conditional>(&stmt.node)) {
                check_object_imports_in(cond->body, objects);
            }
        }
    }

    std::vector<RawLine> lines_;
    size_t pos_ = 0;
    int indent_unit_ = 4;
    std::set<int> seen_steps_;
    AgentProgram program_;
};

} // namespace

AgentProgram parse(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------- printer

namespace {

std::string quote_text(const std::string& payload) {
    if (payload.find('\'') != std::string::npos) return '"' + payload + '"';
    return '\'' + payload + '\'';
}

std::string value_to_string(const Value& value) {
    switch (value.kind) {
    case Value::Kind::ObjectRef: return value.payload;
    case Value::Kind::Text: return quote_text(value.payload);
    case Value::Kind::Number: return value.payload;
    }
    return value.payload;
}

std::string condition_to_string(const Condition& condition) {
    std::string out;
    const char* joiner = condition.connective == Condition::Connective::Or ? " or " : " and ";
    for (size_t i = 0; i < condition.clauses.size(); ++i) {
        if (i > 0) out += joiner;
        const auto& cmp = condition.clauses[i];
        out += cmp.object_id + ".material_properties[" + quote_text(cmp.property_key) + "] " +
               (cmp.op == Comparison::Op::Eq ? "==" : "!=") + " " +
               value_to_string(cmp.literal);
    }
    return out;
}

std::string call_to_string(const Call& call) {
    std::string out = call.callee + "(";
    for (size_t i = 0; i < call.kwargs.size(); ++i) {
        if (i > 0) out += ", ";
        out += call.kwargs[i].first + "=" + value_to_string(call.kwargs[i].second);
    }
    out += ")";
    return out;
}

void print_statements(std::string& out, const std::vector<Statement>& stmts, int level) {
    const std::string indent(static_cast<size_t>(level) * 4, ' ');
    for (const auto& stmt : stmts) {
        if (const auto* comment = std::get_if<Comment>(&stmt.node)) {
            out += indent + "# " + comment->text + "\n";
        } else if (const auto* call = std::get_if<Call>(&stmt.node)) {
            out += indent + call_to_string(*call) + "\n";
        } else if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
            out += indent + "while " + condition_to_string(loop->condition) + ":\n";
            print_statements(out, loop->body, level + 1);
        } else if (const auto* cond = std::get_if<Conditional>(&stmt.node)) {
            out += indent + "if " + condition_to_string(cond->condition) + ":\n";
            print_statements(out, cond->body, level + 1);
        }
    }
}

} // namespace

std::string pretty_print(const AgentProgram& p) {
    std::string out;
    auto emit_import = [&out](const char* module, const std::vector<std::string>& names) {
        if (names.empty()) return;
        out += std::string("from ") + module + " import ";
        for (size_t i = 0; i < names.size(); ++i) {
            if (i > 0) out += ", ";
            out += names[i];
        }
        out += '\n';
    };
    emit_import("utils", p.imports_apis);
    emit_import("objects_pool", p.imports_objects);
    for (const auto& stmt : p.receptacle_stmts) {
        out += stmt.subject;
        out += stmt.relation == Relation::Receptacles ? ".receptacles.append("
                                                      : ".receptacles_of.append(";
        out += stmt.object + ")\n";
    }
    out += "def robot_program():\n";
    print_statements(out, p.body, 1);
    if (p.has_trailing_invocation) out += "robot_program()\n";
    return out;
}

// ---------------------------------------------------------------- analysis

CoverageResult check_step_coverage(const AgentProgram& p, const corpus::Tutorial& t) {
    std::set<int> present;
    std::vector<const std::vector<Statement>*> stack{&p.body};
    while (!stack.empty()) {
        const auto* stmts = stack.back();
        stack.pop_back();
        for (const auto& stmt : *stmts) {
            if (const auto* comment = std::get_if<Comment>(&stmt.node)) {
                if (comment->kind == CommentKind::Step) present.insert(comment->step_number);
            } else if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
                stack.push_back(&loop->body);
            } else if (const auto* cond = std::get_if<Conditional>(&stmt.node)) {
                stack.push_back(&cond->body);
            }
        }
    }
    CoverageResult result;
    for (const auto& step : t.steps)
        if (!present.count(step.index)) result.missing.push_back(step.index);
    return result;
}

namespace {

void walk_calls(const std::vector<Statement>& stmts, std::optional<int>& current_step,
                std::vector<CallSite>& out) {
    for (const auto& stmt : stmts) {
        if (const auto* comment = std::get_if<Comment>(&stmt.node)) {
            if (comment->kind == CommentKind::Step) current_step = comment->step_number;
        } else if (const auto* call = std::get_if<Call>(&stmt.node)) {
            out.push_back({call->callee, call->kwargs, current_step, stmt.line});
        } else if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
            walk_calls(loop->body, current_step, out);
        } else if (const auto* cond = std::get_if<Conditional>(&stmt.node)) {
            walk_calls(cond->body, current_step, out);
        }
    }
}

struct CommentLine {
    int line;
    std::string text;
};

void collect_comments(const std::vector<Statement>& stmts, std::vector<CommentLine>& out) {
    for (const auto& stmt : stmts) {
        if (const auto* comment = std::get_if<Comment>(&stmt.node)) {
            out.push_back({stmt.line, comment->text});
        } else if (const auto* loop = std::get_if<Loop>(&stmt.node)) {
            collect_comments(loop->body, out);
        } else if (const auto* cond = std::get_if<Conditional>(&stmt.node)) {
            collect_comments(cond->body, out);
        }
    }
}

std::vector<UseCase> extract_use_cases_impl(const AgentProgram& p,
                                            const std::string& source_text, bool strict) {
    std::vector<CallSite> calls = extract_calls(p);
    std::vector<CommentLine> comments;
    collect_comments(p.body, comments);
    std::sort(comments.begin(), comments.end(),
              [](const CommentLine& a, const CommentLine& b) { return a.line < b.line; });
    auto lines = split_lines(source_text);

    std::vector<UseCase> out;
    for (const auto& call : calls) {
        const CommentLine* leading = nullptr;
        for (const auto& comment : comments) {
            if (comment.line >= call.line) break;
            leading = &comment;
        }
        if (!leading) {
            if (strict)
                throw Error("NoLeadingComment", "call to '" + call.callee + "' at line " +
                                                    std::to_string(call.line) +
                                                    " has no comment above it");
            continue;
        }
        UseCase use_case;
        use_case.api_name = call.callee;
        use_case.leading_comment = leading->text;
        std::string snippet;
        for (int n = leading->line; n <= call.line; ++n) {
            if (n > leading->line) snippet += '\n';
            snippet += lines[static_cast<size_t>(n) - 1];
        }
        use_case.snippet = std::move(snippet);
        use_case.source_step = call.step.value_or(0);
        out.push_back(std::move(use_case));
    }
    return out;
}

} // namespace

std::vector<CallSite> extract_calls(const AgentProgram& p) {
    std::vector<CallSite> out;
    std::optional<int> current_step;
    walk_calls(p.body, current_step, out);
    return out;
}

std::vector<UseCase> extract_use_cases(const AgentProgram& p, const std::string& source_text) {
    return extract_use_cases_impl(p, source_text, true);
}

std::vector<UseCase> extract_use_cases_lenient(const AgentProgram& p,
                                               const std::string& source_text) {
    return extract_use_cases_impl(p, source_text, false);
}

std::map<std::string, worldmodel::WorldObject> build_world(const AgentProgram& p) {
    std::map<std::string, worldmodel::WorldObject> world;
    auto ensure = [&world](const std::string& id) -> worldmodel::WorldObject& {
        auto [it, inserted] = world.try_emplace(id);
        if (inserted) it->second.id = id;
        return it->second;
    };
    for (const auto& id : p.imports_objects) ensure(id);
    for (const auto& stmt : p.receptacle_stmts) {
        auto& subject = ensure(stmt.subject);
        auto& object = ensure(stmt.object);
        if (stmt.relation == Relation::Receptacles)
            worldmodel::link_receptacle(object, subject);   // subject sits in object
        else
            worldmodel::link_receptacle(subject, object);   // object sits in subject
    }
    return world;
}

} // namespace apiforge::agentlang
