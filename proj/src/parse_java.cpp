#include <cctype>
#include <memory>
#include <vector>

#include "csa/parse.hpp"

// Java subset: classes with fields and methods, local declarations,
// if/while/for/return, assignments, method calls, field/array access,
// arithmetic/logical operators and literals.

namespace csa::ast {

namespace {

enum class Tok { Name, Keyword, Int, Float, Str, Char, Op, End };

struct Token {
    Tok kind;
    std::string text;
    int line = 0;
};

const char* const kKeywords[] = {"class",  "public", "private", "protected", "static", "final",
                                 "void",   "int",    "long",    "short",     "byte",   "float",
                                 "double", "boolean", "char",   "if",        "else",   "while",
                                 "for",    "return", "new",     "true",      "false",  "null", "this"};

bool is_keyword(const std::string& s) {
    for (const char* k : kKeywords)
        if (s == k) return true;
    return false;
}

bool is_modifier(const std::string& s) {
    return s == "public" || s == "private" || s == "protected" || s == "static" || s == "final";
}

bool is_primitive(const std::string& s) {
    return s == "int" || s == "long" || s == "short" || s == "byte" || s == "float" || s == "double" ||
           s == "boolean" || s == "char" || s == "void";
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    size_t pos = 0;
    int line = 1;
    auto peek = [&](int off = 0) { return pos + off < src.size() ? src[pos + off] : '\0'; };
    auto fail = [&](const std::string& msg) -> void {
        throw ParseError("java:" + std::to_string(line) + ": " + msg);
    };
    while (pos < src.size()) {
        char c = src[pos];
        if (c == '\n') {
            ++line;
            ++pos;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (pos < src.size() && src[pos] != '\n') ++pos;
            continue;
        }
        if (c == '/' && peek(1) == '*') {
            pos += 2;
            while (pos < src.size() && !(src[pos] == '*' && peek(1) == '/')) {
                if (src[pos] == '\n') ++line;
                ++pos;
            }
            pos += 2;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
            std::string name;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' || src[pos] == '$'))
                name.push_back(src[pos++]);
            out.push_back({is_keyword(name) ? Tok::Keyword : Tok::Name, name, line});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            bool is_float = false;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) num.push_back(src[pos++]);
            if (pos < src.size() && src[pos] == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                is_float = true;
                num.push_back(src[pos++]);
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) num.push_back(src[pos++]);
            }
            if (pos < src.size() && (src[pos] == 'f' || src[pos] == 'L' || src[pos] == 'd')) ++pos;
            out.push_back({is_float ? Tok::Float : Tok::Int, num, line});
            continue;
        }
        if (c == '"') {
            ++pos;
            std::string text;
            while (pos < src.size() && src[pos] != '"') {
                if (src[pos] == '\\') ++pos;
                if (pos < src.size()) text.push_back(src[pos++]);
            }
            if (pos >= src.size()) fail("unterminated string");
            ++pos;
            out.push_back({Tok::Str, text, line});
            continue;
        }
        if (c == '\'') {
            ++pos;
            std::string text;
            while (pos < src.size() && src[pos] != '\'') {
                if (src[pos] == '\\') ++pos;
                if (pos < src.size()) text.push_back(src[pos++]);
            }
            if (pos >= src.size()) fail("unterminated char literal");
            ++pos;
            out.push_back({Tok::Char, text, line});
            continue;
        }
        static const char* const two[] = {"==", "!=", "<=", ">=", "&&", "||", "++", "--",
                                          "+=", "-=", "*=", "/=", "%="};
        bool matched = false;
        for (const char* op : two) {
            if (c == op[0] && peek(1) == op[1]) {
                out.push_back({Tok::Op, op, line});
                pos += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        switch (c) {
            case '{': case '}': case '(': case ')': case '[': case ']': case ';': case ',': case '.':
            case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '=': case '!':
                out.push_back({Tok::Op, std::string(1, c), line});
                ++pos;
                break;
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::End, "", line});
    return out;
}

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

std::unique_ptr<Node> ident(std::string text) {
    auto n = make(std::move(text));
    n->is_identifier = true;
    return n;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::unique_ptr<Node> parse_program() {
        auto prog = make("program");
        while (!at(Tok::End)) {
            if (at_kw("class") || (at_modifier() && peek_is_class()))
                prog->children.push_back(class_declaration());
            else
                prog->children.push_back(method_declaration());
        }
        return prog;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_op(const char* t) const { return cur().kind == Tok::Op && cur().text == t; }
    bool at_kw(const char* t) const { return cur().kind == Tok::Keyword && cur().text == t; }
    bool at_modifier() const { return cur().kind == Tok::Keyword && is_modifier(cur().text); }
    Token take() { return toks_[pos_++]; }

    bool peek_is_class() const {
        size_t i = pos_;
        while (i < toks_.size() && toks_[i].kind == Tok::Keyword && is_modifier(toks_[i].text)) ++i;
        return i < toks_.size() && toks_[i].kind == Tok::Keyword && toks_[i].text == "class";
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("java:" + std::to_string(cur().line) + ": " + msg);
    }

    void expect_op(const char* t) {
        if (!at_op(t)) fail(std::string("expected '") + t + "'");
        take();
    }

    std::unique_ptr<Node> modifiers_node() {
        bool any = false;
        while (at_modifier()) {
            take();
            any = true;
        }
        return any ? make("modifiers") : nullptr;
    }

    std::unique_ptr<Node> class_declaration() {
        auto cls = make("class_declaration");
        if (auto mods = modifiers_node()) cls->children.push_back(std::move(mods));
        if (!at_kw("class")) fail("expected 'class'");
        take();
        if (!at(Tok::Name)) fail("expected class name");
        cls->children.push_back(ident(take().text));
        auto body = make("class_body");
        expect_op("{");
        while (!at_op("}")) body->children.push_back(member());
        take();
        cls->children.push_back(std::move(body));
        return cls;
    }

    // field or method; decided by what follows "type name"
    std::unique_ptr<Node> member() {
        size_t save = pos_;
        while (pos_ < toks_.size() && at_modifier()) take();
        parse_type(); // probe
        if (!at(Tok::Name)) fail("expected member name");
        take();
        bool is_method = at_op("(");
        pos_ = save;
        return is_method ? method_declaration() : field_declaration();
    }

    std::unique_ptr<Node> field_declaration() {
        auto field = make("field_declaration");
        if (auto mods = modifiers_node()) field->children.push_back(std::move(mods));
        field->children.push_back(parse_type());
        do {
            auto decl = make("variable_declarator");
            if (!at(Tok::Name)) fail("expected field name");
            decl->children.push_back(ident(take().text));
            if (at_op("=")) {
                take();
                decl->children.push_back(expression());
            }
            field->children.push_back(std::move(decl));
        } while (at_op(",") && (take(), true));
        expect_op(";");
        return field;
    }

    std::unique_ptr<Node> method_declaration() {
        auto method = make("method_declaration");
        if (auto mods = modifiers_node()) method->children.push_back(std::move(mods));
        method->children.push_back(parse_type());
        if (!at(Tok::Name)) fail("expected method name");
        method->children.push_back(ident(take().text));
        method->children.push_back(formal_parameters());
        method->children.push_back(block());
        return method;
    }

    std::unique_ptr<Node> parse_type() {
        std::unique_ptr<Node> type;
        if (cur().kind == Tok::Keyword && is_primitive(cur().text)) {
            std::string name = take().text;
            if (name == "void") type = make("void_type");
            else if (name == "boolean") type = make("boolean_type");
            else if (name == "float" || name == "double") type = make("floating_point_type");
            else type = make("integral_type");
        } else if (at(Tok::Name)) {
            type = make("type_identifier");
            type->is_identifier = true;
            type->type = take().text;
        } else {
            fail("expected type");
        }
        while (at_op("[") && ahead(1).kind == Tok::Op && ahead(1).text == "]") {
            take();
            take();
            auto arr = make("array_type");
            arr->children.push_back(std::move(type));
            arr->children.push_back(make("dimensions"));
            type = std::move(arr);
        }
        return type;
    }

    std::unique_ptr<Node> formal_parameters() {
        expect_op("(");
        auto params = make("formal_parameters");
        while (!at_op(")")) {
            auto param = make("formal_parameter");
            param->children.push_back(parse_type());
            if (!at(Tok::Name)) fail("expected parameter name");
            param->children.push_back(ident(take().text));
            params->children.push_back(std::move(param));
            if (at_op(",")) take();
            else break;
        }
        expect_op(")");
        return params;
    }

    std::unique_ptr<Node> block() {
        expect_op("{");
        auto blk = make("block");
        while (!at_op("}")) blk->children.push_back(statement());
        take();
        return blk;
    }

    bool starts_local_declaration() const {
        // "type name" where type is primitive, or "Name Name", or "Name[] Name"
        if (cur().kind == Tok::Keyword && is_primitive(cur().text)) return true;
        if (cur().kind != Tok::Name) return false;
        size_t i = pos_ + 1;
        while (toks_[i].kind == Tok::Op && toks_[i].text == "[" && toks_[i + 1].kind == Tok::Op &&
               toks_[i + 1].text == "]")
            i += 2;
        return toks_[i].kind == Tok::Name;
    }

    std::unique_ptr<Node> statement() {
        if (at_op("{")) return block();
        if (at_kw("if")) return if_statement();
        if (at_kw("while")) return while_statement();
        if (at_kw("for")) return for_statement();
        if (at_kw("return")) {
            take();
            auto ret = make("return_statement");
            if (!at_op(";")) ret->children.push_back(expression());
            expect_op(";");
            return ret;
        }
        if (starts_local_declaration()) {
            auto decl = make("local_variable_declaration");
            decl->children.push_back(parse_type());
            do {
                auto var = make("variable_declarator");
                if (!at(Tok::Name)) fail("expected variable name");
                var->children.push_back(ident(take().text));
                if (at_op("=")) {
                    take();
                    var->children.push_back(expression());
                }
                decl->children.push_back(std::move(var));
            } while (at_op(",") && (take(), true));
            expect_op(";");
            return decl;
        }
        auto stmt = make("expression_statement");
        stmt->children.push_back(expression());
        expect_op(";");
        return stmt;
    }

    std::unique_ptr<Node> if_statement() {
        take(); // if
        auto node = make("if_statement");
        node->children.push_back(parenthesized());
        node->children.push_back(statement());
        if (at_kw("else")) {
            take();
            node->children.push_back(statement());
        }
        return node;
    }

    std::unique_ptr<Node> while_statement() {
        take();
        auto node = make("while_statement");
        node->children.push_back(parenthesized());
        node->children.push_back(statement());
        return node;
    }

    std::unique_ptr<Node> for_statement() {
        take();
        auto node = make("for_statement");
        expect_op("(");
        if (!at_op(";")) {
            if (starts_local_declaration()) {
                auto decl = make("local_variable_declaration");
                decl->children.push_back(parse_type());
                auto var = make("variable_declarator");
                if (!at(Tok::Name)) fail("expected variable name");
                var->children.push_back(ident(take().text));
                if (at_op("=")) {
                    take();
                    var->children.push_back(expression());
                }
                decl->children.push_back(std::move(var));
                node->children.push_back(std::move(decl));
            } else {
                node->children.push_back(expression());
            }
        }
        expect_op(";");
        if (!at_op(";")) node->children.push_back(expression());
        expect_op(";");
        if (!at_op(")")) node->children.push_back(expression());
        expect_op(")");
        node->children.push_back(statement());
        return node;
    }

    std::unique_ptr<Node> parenthesized() {
        expect_op("(");
        auto node = make("parenthesized_expression");
        node->children.push_back(expression());
        expect_op(")");
        return node;
    }

    std::unique_ptr<Node> expression() {
        auto left = logical_or();
        static const char* const assigns[] = {"=", "+=", "-=", "*=", "/=", "%="};
        for (const char* op : assigns) {
            if (at_op(op)) {
                take();
                auto node = make("assignment_expression");
                node->children.push_back(std::move(left));
                node->children.push_back(expression());
                return node;
            }
        }
        return left;
    }

    std::unique_ptr<Node> binary_chain(std::unique_ptr<Node> (Parser::*next)(),
                                       std::initializer_list<const char*> ops) {
        auto left = (this->*next)();
        while (true) {
            bool hit = false;
            for (const char* op : ops) {
                if (at_op(op)) {
                    take();
                    auto node = make("binary_expression");
                    node->children.push_back(std::move(left));
                    node->children.push_back((this->*next)());
                    left = std::move(node);
                    hit = true;
                    break;
                }
            }
            if (!hit) return left;
        }
    }

    std::unique_ptr<Node> logical_or() { return binary_chain(&Parser::logical_and, {"||"}); }
    std::unique_ptr<Node> logical_and() { return binary_chain(&Parser::equality, {"&&"}); }
    std::unique_ptr<Node> equality() { return binary_chain(&Parser::relational, {"==", "!="}); }
    std::unique_ptr<Node> relational() { return binary_chain(&Parser::additive, {"<", ">", "<=", ">="}); }
    std::unique_ptr<Node> additive() { return binary_chain(&Parser::multiplicative, {"+", "-"}); }
    std::unique_ptr<Node> multiplicative() { return binary_chain(&Parser::unary, {"*", "/", "%"}); }

    std::unique_ptr<Node> unary() {
        if (at_op("!") || at_op("-")) {
            take();
            auto node = make("unary_expression");
            node->children.push_back(unary());
            return node;
        }
        return postfix();
    }

    std::unique_ptr<Node> postfix() {
        auto expr = primary();
        while (true) {
            if (at_op(".")) {
                take();
                if (!at(Tok::Name)) fail("expected member name");
                std::string name = take().text;
                if (at_op("(")) {
                    auto call = make("method_invocation");
                    call->children.push_back(std::move(expr));
                    call->children.push_back(ident(name));
                    call->children.push_back(argument_list());
                    expr = std::move(call);
                } else {
                    auto access = make("field_access");
                    access->children.push_back(std::move(expr));
                    access->children.push_back(ident(name));
                    expr = std::move(access);
                }
            } else if (at_op("[")) {
                take();
                auto access = make("array_access");
                access->children.push_back(std::move(expr));
                access->children.push_back(expression());
                expect_op("]");
                expr = std::move(access);
            } else if (at_op("++") || at_op("--")) {
                take();
                auto node = make("update_expression");
                node->children.push_back(std::move(expr));
                expr = std::move(node);
            } else {
                return expr;
            }
        }
    }

    std::unique_ptr<Node> argument_list() {
        expect_op("(");
        auto args = make("argument_list");
        while (!at_op(")")) {
            args->children.push_back(expression());
            if (at_op(",")) take();
            else break;
        }
        expect_op(")");
        return args;
    }

    std::unique_ptr<Node> primary() {
        if (at(Tok::Name)) {
            std::string name = take().text;
            if (at_op("(")) {
                auto call = make("method_invocation");
                call->children.push_back(ident(name));
                call->children.push_back(argument_list());
                return call;
            }
            return ident(name);
        }
        if (at(Tok::Int)) {
            take();
            return make("decimal_integer_literal");
        }
        if (at(Tok::Float)) {
            take();
            return make("decimal_floating_point_literal");
        }
        if (at(Tok::Str)) {
            take();
            return make("string_literal");
        }
        if (at(Tok::Char)) {
            take();
            return make("character_literal");
        }
        if (at_kw("true")) {
            take();
            return make("true");
        }
        if (at_kw("false")) {
            take();
            return make("false");
        }
        if (at_kw("null")) {
            take();
            return make("null_literal");
        }
        if (at_kw("this")) {
            take();
            return make("this");
        }
        if (at_kw("new")) {
            take();
            auto node = make("object_creation_expression");
            node->children.push_back(parse_type());
            node->children.push_back(argument_list());
            return node;
        }
        if (at_op("(")) return parenthesized();
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

Ast parse_java(const std::string& code, const std::string& origin_id) {
    auto toks = lex(code);
    if (toks.size() <= 1) throw EmptyInput("java: no content");
    Parser parser(std::move(toks));
    auto root = parser.parse_program();
    Ast ast;
    ast.source_language = Lang::java;
    ast.origin_id = origin_id;
    flatten(*root, std::nullopt, ast);
    return ast;
}

} // namespace csa::ast
