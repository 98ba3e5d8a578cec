#include <cctype>
#include <memory>
#include <vector>

#include "csa/parse.hpp"

// Python subset: module-level statements and function definitions with
// def/if/elif/else/while/for/return/pass/break/continue, assignments,
// calls, attributes, subscripts, arithmetic/comparison/boolean operators,
// literals, lists, tuples and dicts. Indentation must use spaces.

namespace csa::ast {

namespace {

enum class Tok { Name, Keyword, Int, Float, Str, Op, Newline, Indent, Dedent, End };

struct Token {
    Tok kind;
    std::string text;
    int line = 0;
};

const char* const kKeywords[] = {"def", "return", "if",   "elif",  "else",     "while", "for",
                                 "in",  "pass",   "break", "continue", "and",  "or",    "not",
                                 "True", "False", "None"};

bool is_keyword(const std::string& s) {
    for (const char* k : kKeywords)
        if (s == k) return true;
    return false;
}

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { run(); }
    std::vector<Token> tokens;

  private:
    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int paren_depth_ = 0;
    std::vector<int> indents_{0};

    char peek(int off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }
    char get() { return pos_ < src_.size() ? src_[pos_++] : '\0'; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("python:" + std::to_string(line_) + ": " + msg);
    }

    void run() {
        bool at_line_start = true;
        while (pos_ < src_.size()) {
            if (at_line_start && paren_depth_ == 0) {
                int indent = 0;
                while (peek() == ' ') {
                    ++indent;
                    get();
                }
                if (peek() == '\t') fail("tab indentation not supported");
                if (peek() == '\n' || peek() == '#' || peek() == '\r' || peek() == '\0') {
                    // blank or comment-only line
                    while (peek() != '\n' && peek() != '\0') get();
                    if (peek() == '\n') {
                        get();
                        ++line_;
                    }
                    continue;
                }
                if (indent > indents_.back()) {
                    indents_.push_back(indent);
                    tokens.push_back({Tok::Indent, "", line_});
                } else {
                    while (indent < indents_.back()) {
                        indents_.pop_back();
                        tokens.push_back({Tok::Dedent, "", line_});
                    }
                    if (indent != indents_.back()) fail("inconsistent dedent");
                }
                at_line_start = false;
            }
            char c = peek();
            if (c == '\0') break;
            if (c == '\n') {
                get();
                ++line_;
                if (paren_depth_ == 0) {
                    tokens.push_back({Tok::Newline, "", line_ - 1});
                    at_line_start = true;
                }
                continue;
            }
            if (c == ' ' || c == '\r' || c == '\t') {
                get();
                continue;
            }
            if (c == '#') {
                while (peek() != '\n' && peek() != '\0') get();
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string name;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') name.push_back(get());
                tokens.push_back({is_keyword(name) ? Tok::Keyword : Tok::Name, name, line_});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                bool is_float = false;
                while (std::isdigit(static_cast<unsigned char>(peek()))) num.push_back(get());
                if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    is_float = true;
                    num.push_back(get());
                    while (std::isdigit(static_cast<unsigned char>(peek()))) num.push_back(get());
                }
                tokens.push_back({is_float ? Tok::Float : Tok::Int, num, line_});
                continue;
            }
            if (c == '\'' || c == '"') {
                lex_string();
                continue;
            }
            lex_op();
        }
        if (paren_depth_ != 0) fail("unbalanced brackets at end of input");
        if (!tokens.empty() && tokens.back().kind != Tok::Newline) tokens.push_back({Tok::Newline, "", line_});
        while (indents_.back() > 0) {
            indents_.pop_back();
            tokens.push_back({Tok::Dedent, "", line_});
        }
        tokens.push_back({Tok::End, "", line_});
    }

    void lex_string() {
        char q = get();
        std::string text;
        bool triple = false;
        if (peek() == q && peek(1) == q) {
            triple = true;
            get();
            get();
        }
        while (true) {
            char c = peek();
            if (c == '\0') fail("unterminated string");
            if (!triple && c == '\n') fail("unterminated string");
            if (c == '\\') {
                get();
                text.push_back(get());
                continue;
            }
            if (c == q) {
                if (!triple) {
                    get();
                    break;
                }
                if (peek(1) == q && peek(2) == q) {
                    get();
                    get();
                    get();
                    break;
                }
            }
            if (c == '\n') ++line_;
            text.push_back(get());
        }
        tokens.push_back({Tok::Str, text, line_});
    }

    void lex_op() {
        static const char* const two[] = {"**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=" };
        for (const char* op : two) {
            if (peek() == op[0] && peek(1) == op[1]) {
                get();
                get();
                tokens.push_back({Tok::Op, op, line_});
                return;
            }
        }
        char c = get();
        switch (c) {
            case '(': case '[': case '{':
                ++paren_depth_;
                break;
            case ')': case ']': case '}':
                --paren_depth_;
                break;
            case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '=':
            case ':': case ',': case '.': case ';':
                break;
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
        tokens.push_back({Tok::Op, std::string(1, c), line_});
    }
};

struct Node {
    std::string type;
    bool is_identifier = false;
    std::vector<std::unique_ptr<Node>> children;
};

std::unique_ptr<Node> make(std::string type) {
    auto n = std::make_unique<Node>();
    n->type = std::move(type);
    return n;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::unique_ptr<Node> parse_module() {
        auto mod = make("module");
        while (!at(Tok::End)) mod->children.push_back(statement());
        return mod;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& cur() const { return toks_[pos_]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_op(const char* text) const { return cur().kind == Tok::Op && cur().text == text; }
    bool at_kw(const char* text) const { return cur().kind == Tok::Keyword && cur().text == text; }
    Token take() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("python:" + std::to_string(cur().line) + ": " + msg);
    }

    void expect_op(const char* text) {
        if (!at_op(text)) fail(std::string("expected '") + text + "'");
        take();
    }
    void expect_kw(const char* text) {
        if (!at_kw(text)) fail(std::string("expected '") + text + "'");
        take();
    }
    void expect_newline() {
        if (!at(Tok::Newline)) fail("expected end of line");
        take();
    }

    std::unique_ptr<Node> statement() {
        if (at_kw("def")) return function_definition();
        if (at_kw("if")) return if_statement();
        if (at_kw("while")) return while_statement();
        if (at_kw("for")) return for_statement();
        auto line = simple_statement_line();
        if (line->children.size() == 1 && line->type == "__line__") {
            auto stmt = std::move(line->children[0]);
            return stmt;
        }
        return line; // multiple ';'-joined statements: keep as a block
    }

    // one or more small statements joined by ';', terminated by NEWLINE
    std::unique_ptr<Node> simple_statement_line() {
        auto holder = make("__line__");
        holder->children.push_back(small_statement());
        while (at_op(";")) {
            take();
            if (at(Tok::Newline)) break;
            holder->children.push_back(small_statement());
        }
        expect_newline();
        if (holder->children.size() > 1) holder->type = "block";
        return holder;
    }

    std::unique_ptr<Node> small_statement() {
        if (at_kw("pass")) {
            take();
            return make("pass_statement");
        }
        if (at_kw("break")) {
            take();
            return make("break_statement");
        }
        if (at_kw("continue")) {
            take();
            return make("continue_statement");
        }
        if (at_kw("return")) {
            take();
            auto ret = make("return_statement");
            if (!at(Tok::Newline) && !at_op(";")) ret->children.push_back(testlist());
            return ret;
        }
        auto value = testlist();
        if (at_op("=")) {
            take();
            auto assign = make("assignment");
            assign->children.push_back(std::move(value));
            assign->children.push_back(testlist());
            auto stmt = make("expression_statement");
            stmt->children.push_back(std::move(assign));
            return stmt;
        }
        static const char* const aug[] = {"+=", "-=", "*=", "/=", "%="};
        for (const char* op : aug) {
            if (at_op(op)) {
                take();
                auto assign = make("augmented_assignment");
                assign->children.push_back(std::move(value));
                assign->children.push_back(testlist());
                auto stmt = make("expression_statement");
                stmt->children.push_back(std::move(assign));
                return stmt;
            }
        }
        auto stmt = make("expression_statement");
        stmt->children.push_back(std::move(value));
        return stmt;
    }

    std::unique_ptr<Node> function_definition() {
        expect_kw("def");
        auto fn = make("function_definition");
        if (!at(Tok::Name)) fail("expected function name");
        auto name = make(take().text);
        name->is_identifier = true;
        fn->children.push_back(std::move(name));
        fn->children.push_back(parameters());
        expect_op(":");
        fn->children.push_back(suite());
        return fn;
    }

    std::unique_ptr<Node> parameters() {
        expect_op("(");
        auto params = make("parameters");
        while (!at_op(")")) {
            if (!at(Tok::Name)) fail("expected parameter name");
            auto pname = make(take().text);
            pname->is_identifier = true;
            if (at_op("=")) {
                take();
                auto def = make("default_parameter");
                def->children.push_back(std::move(pname));
                def->children.push_back(test());
                params->children.push_back(std::move(def));
            } else {
                params->children.push_back(std::move(pname));
            }
            if (at_op(",")) take();
            else break;
        }
        expect_op(")");
        return params;
    }

    std::unique_ptr<Node> if_statement() {
        expect_kw("if");
        auto node = make("if_statement");
        node->children.push_back(test());
        expect_op(":");
        node->children.push_back(suite());
        while (at_kw("elif")) {
            take();
            auto clause = make("elif_clause");
            clause->children.push_back(test());
            expect_op(":");
            clause->children.push_back(suite());
            node->children.push_back(std::move(clause));
        }
        if (at_kw("else")) {
            take();
            expect_op(":");
            auto clause = make("else_clause");
            clause->children.push_back(suite());
            node->children.push_back(std::move(clause));
        }
        return node;
    }

    std::unique_ptr<Node> while_statement() {
        expect_kw("while");
        auto node = make("while_statement");
        node->children.push_back(test());
        expect_op(":");
        node->children.push_back(suite());
        return node;
    }

    std::unique_ptr<Node> for_statement() {
        expect_kw("for");
        auto node = make("for_statement");
        node->children.push_back(target_list());
        expect_kw("in");
        node->children.push_back(testlist());
        expect_op(":");
        node->children.push_back(suite());
        return node;
    }

    std::unique_ptr<Node> target_list() {
        auto first = atom_expr();
        if (!at_op(",")) return first;
        auto tup = make("pattern_list");
        tup->children.push_back(std::move(first));
        while (at_op(",")) {
            take();
            tup->children.push_back(atom_expr());
        }
        return tup;
    }

    std::unique_ptr<Node> suite() {
        auto block = make("block");
        if (at(Tok::Newline)) {
            take();
            if (!at(Tok::Indent)) fail("expected indented block");
            take();
            while (!at(Tok::Dedent)) block->children.push_back(statement());
            take();
        } else {
            // inline suite: small statements on the def/if line itself
            block->children.push_back(small_statement());
            while (at_op(";")) {
                take();
                if (at(Tok::Newline)) break;
                block->children.push_back(small_statement());
            }
            expect_newline();
        }
        return block;
    }

    std::unique_ptr<Node> testlist() {
        auto first = test();
        if (!at_op(",")) return first;
        auto tup = make("expression_list");
        tup->children.push_back(std::move(first));
        while (at_op(",")) {
            take();
            if (at(Tok::Newline) || at_op(")") || at_op("]") || at_op("}") || at_op(":")) break;
            tup->children.push_back(test());
        }
        return tup;
    }

    std::unique_ptr<Node> test() { return or_test(); }

    std::unique_ptr<Node> or_test() {
        auto left = and_test();
        while (at_kw("or")) {
            take();
            auto node = make("boolean_operator");
            node->children.push_back(std::move(left));
            node->children.push_back(and_test());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Node> and_test() {
        auto left = not_test();
        while (at_kw("and")) {
            take();
            auto node = make("boolean_operator");
            node->children.push_back(std::move(left));
            node->children.push_back(not_test());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Node> not_test() {
        if (at_kw("not")) {
            take();
            auto node = make("not_operator");
            node->children.push_back(not_test());
            return node;
        }
        return comparison();
    }

    bool at_comp_op() const {
        return at_op("<") || at_op(">") || at_op("==") || at_op("!=") || at_op("<=") || at_op(">=") || at_kw("in");
    }

    std::unique_ptr<Node> comparison() {
        auto left = arith();
        if (!at_comp_op()) return left;
        auto node = make("comparison_operator");
        node->children.push_back(std::move(left));
        while (at_comp_op()) {
            take();
            node->children.push_back(arith());
        }
        return node;
    }

    std::unique_ptr<Node> arith() {
        auto left = term();
        while (at_op("+") || at_op("-")) {
            take();
            auto node = make("binary_operator");
            node->children.push_back(std::move(left));
            node->children.push_back(term());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Node> term() {
        auto left = factor();
        while (at_op("*") || at_op("/") || at_op("//") || at_op("%")) {
            take();
            auto node = make("binary_operator");
            node->children.push_back(std::move(left));
            node->children.push_back(factor());
            left = std::move(node);
        }
        return left;
    }

    std::unique_ptr<Node> factor() {
        if (at_op("-") || at_op("+")) {
            take();
            auto node = make("unary_operator");
            node->children.push_back(factor());
            return node;
        }
        return power();
    }

    std::unique_ptr<Node> power() {
        auto base = atom_expr();
        if (at_op("**")) {
            take();
            auto node = make("binary_operator");
            node->children.push_back(std::move(base));
            node->children.push_back(factor());
            return node;
        }
        return base;
    }

    std::unique_ptr<Node> atom_expr() {
        auto expr = atom();
        while (true) {
            if (at_op("(")) {
                auto call = make("call");
                call->children.push_back(std::move(expr));
                call->children.push_back(argument_list());
                expr = std::move(call);
            } else if (at_op(".")) {
                take();
                if (!at(Tok::Name)) fail("expected attribute name");
                auto attr = make("attribute");
                attr->children.push_back(std::move(expr));
                auto name = make(take().text);
                name->is_identifier = true;
                attr->children.push_back(std::move(name));
                expr = std::move(attr);
            } else if (at_op("[")) {
                take();
                auto sub = make("subscript");
                sub->children.push_back(std::move(expr));
                sub->children.push_back(test());
                expect_op("]");
                expr = std::move(sub);
            } else {
                return expr;
            }
        }
    }

    std::unique_ptr<Node> argument_list() {
        expect_op("(");
        auto args = make("argument_list");
        while (!at_op(")")) {
            if (at(Tok::Name) && pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == Tok::Op &&
                toks_[pos_ + 1].text == "=") {
                auto kw = make("keyword_argument");
                auto name = make(take().text);
                name->is_identifier = true;
                take(); // '='
                kw->children.push_back(std::move(name));
                kw->children.push_back(test());
                args->children.push_back(std::move(kw));
            } else {
                args->children.push_back(test());
            }
            if (at_op(",")) take();
            else break;
        }
        expect_op(")");
        return args;
    }

    std::unique_ptr<Node> atom() {
        if (at(Tok::Name)) {
            auto id = make(take().text);
            id->is_identifier = true;
            return id;
        }
        if (at(Tok::Int)) {
            take();
            return make("integer");
        }
        if (at(Tok::Float)) {
            take();
            return make("float");
        }
        if (at(Tok::Str)) {
            take();
            return make("string");
        }
        if (at_kw("True")) {
            take();
            return make("true");
        }
        if (at_kw("False")) {
            take();
            return make("false");
        }
        if (at_kw("None")) {
            take();
            return make("none");
        }
        if (at_op("(")) {
            take();
            if (at_op(")")) {
                take();
                return make("tuple");
            }
            auto inner = testlist();
            expect_op(")");
            if (inner->type == "expression_list") {
                inner->type = "tuple";
                return inner;
            }
            auto paren = make("parenthesized_expression");
            paren->children.push_back(std::move(inner));
            return paren;
        }
        if (at_op("[")) {
            take();
            auto list = make("list");
            while (!at_op("]")) {
                list->children.push_back(test());
                if (at_op(",")) take();
                else break;
            }
            expect_op("]");
            return list;
        }
        if (at_op("{")) {
            take();
            auto dict = make("dictionary");
            while (!at_op("}")) {
                auto pair = make("pair");
                pair->children.push_back(test());
                expect_op(":");
                pair->children.push_back(test());
                dict->children.push_back(std::move(pair));
                if (at_op(",")) take();
                else break;
            }
            expect_op("}");
            return dict;
        }
        fail("unexpected token '" + cur().text + "'");
    }
};

void flatten(const Node& node, std::optional<int> parent, Ast& out) {
    AstNode ast_node;
    ast_node.id = static_cast<int>(out.nodes.size());
    ast_node.node_type = node.type;
    ast_node.parent = parent;
    ast_node.is_identifier = node.is_identifier;
    int id = ast_node.id;
    out.nodes.push_back(std::move(ast_node));
    for (const auto& child : node.children) {
        int cid = static_cast<int>(out.nodes.size());
        out.nodes[id].children.push_back(cid);
        flatten(*child, id, out);
        out.nodes[cid].child_index = static_cast<int>(out.nodes[id].children.size()) - 1;
    }
}

} // namespace

Ast parse_python(const std::string& code, const std::string& origin_id) {
    Lexer lexer(code);
    bool any_content = false;
    for (const auto& t : lexer.tokens)
        if (t.kind != Tok::Newline && t.kind != Tok::End && t.kind != Tok::Dedent) any_content = true;
    if (!any_content) throw EmptyInput("python: no content");
    Parser parser(std::move(lexer.tokens));
    auto root = parser.parse_module();
    Ast ast;
    ast.source_language = Lang::python;
    ast.origin_id = origin_id;
    flatten(*root, std::nullopt, ast);
    return ast;
}

Ast parse_source(const std::string& code, Lang lang) {
    return lang == Lang::python ? parse_python(code) : parse_java(code);
}

std::string python_docstring(const std::string& code) {
    // token-level scan: the first statement after "def ...:" NEWLINE INDENT
    // that is a bare string is the docstring
    Lexer lexer(code);
    const auto& toks = lexer.tokens;
    for (size_t i = 0; i + 3 < toks.size(); ++i) {
        if (toks[i].kind == Tok::Keyword && toks[i].text == "def") {
            size_t j = i;
            while (j < toks.size() && toks[j].kind != Tok::Newline) ++j;
            if (j + 2 < toks.size() && toks[j + 1].kind == Tok::Indent && toks[j + 2].kind == Tok::Str)
                return toks[j + 2].text;
        }
    }
    return "";
}

} // namespace csa::ast
