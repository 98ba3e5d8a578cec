#include <doctest.h>

#include "csa/ast.hpp"
#include "csa/parse.hpp"
#include "helpers.hpp"

using namespace csa;
using namespace csa::ast;

namespace {
// module -> expression_statement -> identifier leaf
Ast make_tree_with_leaf(const std::string& name) {
    Ast tree = helpers::make_tree({-1, 0, 1});
    tree.nodes[0].node_type = "module";
    tree.nodes[1].node_type = "expression_statement";
    tree.nodes[2].node_type = name;
    tree.nodes[2].is_identifier = true;
    return tree;
}
} // namespace

TEST_CASE("subtokenize splits snake_case") {
    CHECK(subtokenize("config_option_show") == std::vector<std::string>{"config", "option", "show"});
    CHECK(subtokenize("__a") == std::vector<std::string>{"a"});
    CHECK(subtokenize("s") == std::vector<std::string>{"s"});
}

TEST_CASE("subtokenize splits CamelCase") {
    CHECK(subtokenize("getMaxValue") == std::vector<std::string>{"get", "max", "value"});
    CHECK(subtokenize("HTTPServer") == std::vector<std::string>{"http", "server"});
    CHECK(subtokenize("parseHTTPResponse") == std::vector<std::string>{"parse", "http", "response"});
    CHECK(subtokenize("value2") == std::vector<std::string>{"value2"});
}

TEST_CASE("subtokenize is idempotent on its outputs") {
    Rng rng(7);
    const char* samples[] = {"config_option_show", "getMaxValue", "HTTPServer", "do_itNow", "A_B_C"};
    for (const char* s : samples) {
        for (const auto& piece : subtokenize(s)) {
            CHECK(subtokenize(piece) == std::vector<std::string>{piece});
        }
    }
    (void)rng;
}

TEST_CASE("parse_python handles def with inline pass") {
    Ast tree = parse_python("def f(): pass\n");
    REQUIRE(tree.size() == 6);
    CHECK(tree.nodes[0].node_type == "module");
    REQUIRE(tree.nodes[0].children.size() == 1);
    CHECK(tree.nodes[tree.nodes[0].children[0]].node_type == "function_definition");
    // recorded structure: module / function_definition / (name, parameters, block / pass)
    std::vector<std::string> types;
    for (const auto& node : tree.nodes) types.push_back(node.node_type);
    CHECK(types == std::vector<std::string>{"module", "function_definition", "f", "parameters", "block",
                                            "pass_statement"});
    CHECK(tree.nodes[2].is_identifier);
    validate(tree);
}

TEST_CASE("parse_python single identifier statement is one root-to-leaf path") {
    Ast tree = parse_python("some_name\n");
    REQUIRE(tree.size() == 3);
    CHECK(tree.nodes[0].node_type == "module");
    CHECK(tree.nodes[1].node_type == "expression_statement");
    CHECK(tree.nodes[2].node_type == "some_name");
    CHECK(tree.nodes[2].children.empty());
    for (int i = 0; i + 1 < tree.size(); ++i) CHECK(tree.nodes[i].children.size() == 1);
}

TEST_CASE("parse_python rejects empty and malformed input") {
    CHECK_THROWS_AS(parse_python(""), EmptyInput);
    CHECK_THROWS_AS(parse_python("   \n# comment only\n"), EmptyInput);
    CHECK_THROWS_AS(parse_python("def f(:\n"), ParseError);
    CHECK_THROWS_AS(parse_python("return @@\n"), ParseError);
}

TEST_CASE("parse_python structured fixture") {
    const char* code =
        "def config_option_show(context, data_dict):\n"
        "    return {'success': False}\n";
    Ast tree = parse_python(code);
    validate(tree);
    std::vector<std::string> types;
    for (const auto& node : tree.nodes) types.push_back(node.node_type);
    CHECK(types == std::vector<std::string>{"module", "function_definition", "config_option_show", "parameters",
                                            "context", "data_dict", "block", "return_statement", "dictionary",
                                            "pair", "string", "false"});
}

TEST_CASE("parse_java builds a program tree") {
    const char* code =
        "class Calc {\n"
        "  int addTwo(int a, int b) { return a + b; }\n"
        "}\n";
    Ast tree = parse_java(code);
    validate(tree);
    CHECK(tree.nodes[0].node_type == "program");
    CHECK(tree.nodes[1].node_type == "class_declaration");
    bool found_method = false, found_name = false;
    for (const auto& node : tree.nodes) {
        if (node.node_type == "method_declaration") found_method = true;
        if (node.node_type == "addTwo" && node.is_identifier) found_name = true;
    }
    CHECK(found_method);
    CHECK(found_name);
    CHECK_THROWS_AS(parse_java(""), EmptyInput);
    CHECK_THROWS_AS(parse_java("class {"), ParseError);
}

TEST_CASE("load_serialized minimal record") {
    DatasetRecord rec = load_serialized(
        R"({"origin_id":"t0","lang":"python","nodes":[{"id":0,"type":"module","parent":null,"children":[]}],"summary":[]})");
    CHECK(rec.ast.size() == 1);
    CHECK(rec.ast.nodes[0].node_type == "module");
    CHECK_FALSE(rec.ast.nodes[0].parent.has_value());
}

TEST_CASE("load_serialized rejects inconsistent topology") {
    // node 1 claims parent 0 but 0 does not list it
    CHECK_THROWS_AS(load_serialized(R"({"origin_id":"t","lang":"python","nodes":[)"
                                    R"({"id":0,"type":"module","parent":null,"children":[]},)"
                                    R"({"id":1,"type":"x","parent":0,"children":[]}],"summary":[]})"),
                    TopologyError);
    CHECK_THROWS_AS(load_serialized(R"({"origin_id":"t","lang":"python","nodes":[{"id":0}],"summary":[]})"),
                    SchemaError);
    CHECK_THROWS_AS(load_serialized("{}"), SchemaError);
    CHECK_THROWS_AS(load_serialized("not json"), SchemaError);
}

TEST_CASE("serialize round trip is byte-exact on canonical form") {
    Ast tree = parse_python("def f(x):\n    return x + 1\n");
    DatasetRecord rec{tree, {"returns", "x", "plus", "one"}};
    std::string canonical = serialize(rec);
    DatasetRecord reloaded = load_serialized(canonical);
    CHECK(serialize(reloaded) == canonical);
}

TEST_CASE("serialize/load round trip preserves structure on random trees") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        DatasetRecord rec;
        rec.ast = helpers::random_tree(rng, 1 + static_cast<int>(rng.below(60)));
        rec.ast.origin_id = "r" + std::to_string(trial);
        rec.summary_tokens = {"a", "b"};
        DatasetRecord back = load_serialized(serialize(rec));
        REQUIRE(back.ast.size() == rec.ast.size());
        for (int i = 0; i < rec.ast.size(); ++i) {
            CHECK(back.ast.nodes[i].node_type == rec.ast.nodes[i].node_type);
            CHECK(back.ast.nodes[i].parent == rec.ast.nodes[i].parent);
            CHECK(back.ast.nodes[i].children == rec.ast.nodes[i].children);
            CHECK(back.ast.nodes[i].child_index == rec.ast.nodes[i].child_index);
        }
    }
}

TEST_CASE("attach_subtokens expands identifier leaves into chains") {
    Ast tree = make_tree_with_leaf("config_option_show");
    Ast out = attach_subtokens(tree);
    validate(out);
    CHECK(out.size() == tree.size() + 2);
    // chain: config -> option -> show
    int leaf = -1;
    for (const auto& node : out.nodes)
        if (node.node_type == "config") leaf = node.id;
    REQUIRE(leaf >= 0);
    REQUIRE(out.nodes[leaf].children.size() == 1);
    int mid = out.nodes[leaf].children[0];
    CHECK(out.nodes[mid].node_type == "option");
    REQUIRE(out.nodes[mid].children.size() == 1);
    CHECK(out.nodes[out.nodes[mid].children[0]].node_type == "show");
}

TEST_CASE("attach_subtokens identity for single-piece leaves") {
    Ast tree = make_tree_with_leaf("s");
    Ast out = attach_subtokens(tree);
    CHECK(out.size() == tree.size());
    CHECK(out.nodes.back().node_type == "s");
}

TEST_CASE("attach_subtokens node-count identity and idempotence") {
    Ast tree = parse_python("def getMaxValue(first_arg):\n    total_sum = first_arg + 1\n    return total_sum\n");
    long extra = 0;
    for (const auto& node : tree.nodes)
        if (node.is_identifier && node.children.empty()) extra += static_cast<long>(subtokenize(node.node_type).size()) - 1;
    Ast once = attach_subtokens(tree);
    validate(once);
    CHECK(once.size() == tree.size() + extra);
    Ast twice = attach_subtokens(once);
    REQUIRE(twice.size() == once.size());
    for (int i = 0; i < once.size(); ++i) CHECK(twice.nodes[i].node_type == once.nodes[i].node_type);
}

TEST_CASE("truncate keeps a valid pre-order prefix") {
    Rng rng(5);
    Ast small = helpers::random_tree(rng, 10);
    CHECK(truncate(small, 150).size() == 10);

    Ast big = helpers::random_tree(rng, 200);
    Ast cut = truncate(big, 150);
    CHECK(cut.size() == 150);
    validate(cut);
    for (const auto& node : cut.nodes)
        if (node.parent) CHECK(*node.parent < 150);

    std::vector<int> chain_parents(300);
    chain_parents[0] = -1;
    for (int i = 1; i < 300; ++i) chain_parents[i] = i - 1;
    Ast chain = helpers::make_tree(chain_parents);
    CHECK(truncate(chain, 150).size() == 150);
    validate(truncate(chain, 150));
}

TEST_CASE("build_vocab ranks by frequency with lexicographic ties") {
    std::vector<DatasetRecord> corpus(1);
    corpus[0].ast = helpers::make_tree({-1, 0, 0});
    corpus[0].ast.nodes[0].node_type = "x";
    corpus[0].ast.nodes[1].node_type = "b";
    corpus[0].ast.nodes[2].node_type = "a";
    Vocabulary vocab = build_vocab(corpus, VocabSource::node_types, 10000);
    CHECK(vocab.size() == 7); // 4 specials + 3 distinct
    CHECK(vocab.encode("a") < vocab.encode("b")); // tie broken lexicographically
    CHECK(vocab.encode("nope") == Vocabulary::kUnk);
    CHECK(vocab.encode("x") >= 4);
    CHECK_THROWS_AS(build_vocab({}, VocabSource::node_types, 10), EmptyCorpus);
}

TEST_CASE("build_vocab respects max size") {
    Rng rng(3);
    std::vector<DatasetRecord> corpus(1);
    corpus[0].ast = helpers::random_tree(rng, 40);
    Vocabulary vocab = build_vocab(corpus, VocabSource::node_types, 6);
    CHECK(vocab.size() <= 6);
}

TEST_CASE("summary tokenization lowercases and keeps punctuation attached") {
    auto toks = tokenize_summary("Returns the Config value.");
    CHECK(toks == std::vector<std::string>{"returns", "the", "config", "value."});
}

TEST_CASE("encode_node_types maps unseen to UNK") {
    std::vector<DatasetRecord> corpus(1);
    corpus[0].ast = helpers::make_tree({-1, 0});
    corpus[0].ast.nodes[0].node_type = "module";
    corpus[0].ast.nodes[1].node_type = "call";
    Vocabulary vocab = build_vocab(corpus, VocabSource::node_types, 100);
    Ast other = helpers::make_tree({-1, 0});
    other.nodes[0].node_type = "module";
    other.nodes[1].node_type = "never_seen";
    auto ids = encode_node_types(other, vocab);
    CHECK(ids[0] == vocab.encode("module"));
    CHECK(ids[1] == Vocabulary::kUnk);
}
