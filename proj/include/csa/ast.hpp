#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csa/errors.hpp"

namespace csa::ast {

enum class Lang { java, python };

std::string lang_name(Lang lang);
Lang lang_from_name(const std::string& name);

struct AstNode {
    int id = 0; // pre-order index
    std::string node_type;
    std::optional<int> parent;
    std::vector<int> children;
    int child_index = 0; // position among siblings
    // set by the parser for identifier leaves; not part of the wire format
    bool is_identifier = false;
};

struct Ast {
    std::vector<AstNode> nodes;
    Lang source_language = Lang::python;
    std::string origin_id;

    int size() const { return static_cast<int>(nodes.size()); }
    const AstNode& root() const { return nodes.at(0); }
};

// Checks pre-order ids, link consistency, acyclicity and child_index.
// Throws TopologyError on violation.
void validate(const Ast& ast);

struct DatasetRecord {
    Ast ast;
    std::vector<std::string> summary_tokens;
};

struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kEos = 3;

    std::map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token; // index == id
    int max_size = 0;

    int size() const { return static_cast<int>(id_to_token.size()); }
    int encode(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? kUnk : it->second;
    }
    const std::string& decode(int id) const { return id_to_token.at(id); }
};

enum class VocabSource { node_types, summary };

// CamelCase / snake_case splitting, lowercased, empty pieces dropped.
std::vector<std::string> subtokenize(const std::string& identifier);

// Whitespace split + lowercase; punctuation stays attached to its word.
std::vector<std::string> tokenize_summary(const std::string& text);

// Replaces every multi-piece identifier leaf by a vertical subtoken chain
// and recomputes pre-order ids.
Ast attach_subtokens(const Ast& ast);

// Keeps the first max_nodes nodes in pre-order.
Ast truncate(const Ast& ast, int max_nodes = 150);

Vocabulary build_vocab(const std::vector<DatasetRecord>& corpus, VocabSource which, int max_size);

// Canonical JSONL wire format. serialize() output is the canonical form:
// one compact JSON object, nodes sorted by id, children ascending.
std::string serialize(const DatasetRecord& record);
DatasetRecord load_serialized(const std::string& json_line);

std::vector<DatasetRecord> load_jsonl(const std::string& path);
void save_jsonl(const std::vector<DatasetRecord>& records, const std::string& path);

std::vector<int> encode_node_types(const Ast& ast, const Vocabulary& vocab);

} // namespace csa::ast
