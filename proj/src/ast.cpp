#include "csa/ast.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace csa::ast {

using nlohmann::json;

std::string lang_name(Lang lang) { return lang == Lang::java ? "java" : "python"; }

Lang lang_from_name(const std::string& name) {
    if (name == "java") return Lang::java;
    if (name == "python") return Lang::python;
    throw SchemaError("unknown language: " + name);
}

void validate(const Ast& ast) {
    const int n = ast.size();
    if (n < 1) throw TopologyError("empty ast");
    if (ast.nodes[0].parent.has_value()) throw TopologyError("root must not have a parent");
    for (int i = 0; i < n; ++i) {
        const AstNode& node = ast.nodes[i];
        if (node.id != i) throw TopologyError("node ids must be 0..N-1 in order");
        if (i > 0 && !node.parent.has_value()) throw TopologyError("non-root node without parent");
        if (node.parent) {
            int p = *node.parent;
            if (p < 0 || p >= n) throw TopologyError("parent id out of range");
            const auto& sibs = ast.nodes[p].children;
            auto it = std::find(sibs.begin(), sibs.end(), i);
            if (it == sibs.end()) throw TopologyError("parent does not list node as child");
            if (node.child_index != static_cast<int>(it - sibs.begin()))
                throw TopologyError("child_index inconsistent with parent's child list");
        }
        for (int c : node.children) {
            if (c < 0 || c >= n) throw TopologyError("child id out of range");
            if (!ast.nodes[c].parent || *ast.nodes[c].parent != i)
                throw TopologyError("child does not point back to parent");
        }
    }
    // pre-order check: DFS visiting children in list order must yield 0..N-1
    std::vector<int> order;
    order.reserve(n);
    std::function<void(int)> dfs = [&](int v) {
        order.push_back(v);
        if (static_cast<int>(order.size()) > n) throw TopologyError("cycle detected");
        for (int c : ast.nodes[v].children) dfs(c);
    };
    dfs(0);
    if (static_cast<int>(order.size()) != n) throw TopologyError("tree is not connected");
    for (int i = 0; i < n; ++i)
        if (order[i] != i) throw TopologyError("ids are not in pre-order");
}

std::vector<std::string> subtokenize(const std::string& identifier) {
    // split into alphanumeric segments first (underscores and any other
    // separators vanish), then split each segment at camel-case boundaries
    std::vector<std::string> out;
    std::string seg;
    auto flush_camel = [&](const std::string& s) {
        if (s.empty()) return;
        size_t start = 0;
        auto is_up = [](char c) { return c >= 'A' && c <= 'Z'; };
        auto is_lo = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
        for (size_t i = 1; i < s.size(); ++i) {
            bool boundary = false;
            if (is_up(s[i]) && is_lo(s[i - 1])) boundary = true; // value|Max
            else if (i + 1 < s.size() && is_up(s[i]) && is_up(s[i - 1]) && is_lo(s[i + 1]))
                boundary = true; // HTTP|Server: split before the last uppercase of a run
            if (boundary) {
                out.push_back(s.substr(start, i - start));
                start = i;
            }
        }
        out.push_back(s.substr(start));
    };
    for (char c : identifier) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            seg.push_back(c);
        } else {
            flush_camel(seg);
            seg.clear();
        }
    }
    flush_camel(seg);
    for (auto& tok : out)
        for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> tokenize_summary(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(word);
    }
    return out;
}

Ast attach_subtokens(const Ast& ast) {
    Ast out;
    out.source_language = ast.source_language;
    out.origin_id = ast.origin_id;
    // pre-order rebuild; an identifier leaf expands in place into a chain
    std::function<int(int, std::optional<int>)> emit = [&](int v, std::optional<int> parent) -> int {
        const AstNode& src = ast.nodes[v];
        AstNode node;
        node.id = static_cast<int>(out.nodes.size());
        node.parent = parent;
        node.node_type = src.node_type;
        node.is_identifier = src.is_identifier;
        int head = node.id;
        out.nodes.push_back(std::move(node));
        if (src.is_identifier && src.children.empty()) {
            auto pieces = subtokenize(src.node_type);
            if (pieces.size() > 1) {
                out.nodes[head].node_type = pieces[0];
                int prev = head;
                for (size_t i = 1; i < pieces.size(); ++i) {
                    AstNode link;
                    link.id = static_cast<int>(out.nodes.size());
                    link.parent = prev;
                    link.node_type = pieces[i];
                    link.is_identifier = true;
                    out.nodes[prev].children.push_back(link.id);
                    link.child_index = 0;
                    prev = link.id;
                    out.nodes.push_back(std::move(link));
                }
            }
            return head;
        }
        for (int c : src.children) {
            int cid = emit(c, head);
            out.nodes[cid].child_index = static_cast<int>(out.nodes[head].children.size());
            out.nodes[head].children.push_back(cid);
        }
        return head;
    };
    emit(0, std::nullopt);
    return out;
}

Ast truncate(const Ast& ast, int max_nodes) {
    if (ast.size() <= max_nodes) return ast;
    Ast out;
    out.source_language = ast.source_language;
    out.origin_id = ast.origin_id;
    out.nodes.assign(ast.nodes.begin(), ast.nodes.begin() + max_nodes);
    for (auto& node : out.nodes) {
        auto& ch = node.children;
        ch.erase(std::remove_if(ch.begin(), ch.end(), [&](int c) { return c >= max_nodes; }), ch.end());
        for (size_t i = 0; i < ch.size(); ++i) out.nodes[ch[i]].child_index = static_cast<int>(i);
    }
    return out;
}

Vocabulary build_vocab(const std::vector<DatasetRecord>& corpus, VocabSource which, int max_size) {
    if (corpus.empty()) throw EmptyCorpus("build_vocab: empty corpus");
    std::unordered_map<std::string, long> freq;
    for (const auto& rec : corpus) {
        if (which == VocabSource::node_types) {
            for (const auto& node : rec.ast.nodes) ++freq[node.node_type];
        } else {
            for (const auto& tok : rec.summary_tokens) ++freq[tok];
        }
    }
    std::vector<std::pair<std::string, long>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    vocab.max_size = max_size;
    vocab.id_to_token = {"<pad>", "<unk>", "<bos>", "<eos>"};
    for (const auto& [tok, count] : items) {
        (void)count;
        if (vocab.size() >= max_size) break;
        vocab.token_to_id[tok] = vocab.size();
        vocab.id_to_token.push_back(tok);
    }
    return vocab;
}

std::string serialize(const DatasetRecord& record) {
    json nodes = json::array();
    for (const auto& node : record.ast.nodes) {
        json n;
        n["id"] = node.id;
        n["type"] = node.node_type;
        if (node.parent) n["parent"] = *node.parent;
        else n["parent"] = nullptr;
        json ch = json::array();
        auto sorted = node.children;
        std::sort(sorted.begin(), sorted.end());
        for (int c : sorted) ch.push_back(c);
        n["children"] = ch;
        nodes.push_back(n);
    }
    json j;
    j["origin_id"] = record.ast.origin_id;
    j["lang"] = lang_name(record.ast.source_language);
    j["nodes"] = nodes;
    j["summary"] = record.summary_tokens;
    return j.dump();
}

DatasetRecord load_serialized(const std::string& json_line) {
    json j;
    try {
        j = json::parse(json_line);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("origin_id") || !j.contains("lang") || !j.contains("nodes") ||
        !j.contains("summary"))
        throw SchemaError("record must have origin_id, lang, nodes, summary");
    DatasetRecord rec;
    try {
        rec.ast.origin_id = j["origin_id"].get<std::string>();
        rec.ast.source_language = lang_from_name(j["lang"].get<std::string>());
        rec.summary_tokens = j["summary"].get<std::vector<std::string>>();
        const auto& nodes = j["nodes"];
        if (!nodes.is_array() || nodes.empty()) throw SchemaError("nodes must be a nonempty array");
        rec.ast.nodes.resize(nodes.size());
        for (const auto& n : nodes) {
            if (!n.contains("id") || !n.contains("type") || !n.contains("parent") || !n.contains("children"))
                throw SchemaError("node must have id, type, parent, children");
            int id = n["id"].get<int>();
            if (id < 0 || id >= static_cast<int>(nodes.size())) throw SchemaError("node id out of range");
            AstNode& node = rec.ast.nodes[id];
            node.id = id;
            node.node_type = n["type"].get<std::string>();
            if (!n["parent"].is_null()) node.parent = n["parent"].get<int>();
            node.children = n["children"].get<std::vector<int>>();
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad record: ") + e.what());
    }
    // child_index is derived from the parent's (ascending) child list
    for (auto& node : rec.ast.nodes) {
        std::sort(node.children.begin(), node.children.end());
        for (size_t i = 0; i < node.children.size(); ++i) {
            int c = node.children[i];
            if (c < 0 || c >= rec.ast.size()) throw TopologyError("child id out of range");
            rec.ast.nodes[c].child_index = static_cast<int>(i);
        }
    }
    validate(rec.ast);
    return rec;
}

std::vector<DatasetRecord> load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<DatasetRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(load_serialized(line));
    }
    return out;
}

void save_jsonl(const std::vector<DatasetRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    for (const auto& rec : records) out << serialize(rec) << "\n";
}

std::vector<int> encode_node_types(const Ast& ast, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(ast.nodes.size());
    for (const auto& node : ast.nodes) ids.push_back(vocab.encode(node.node_type));
    return ids;
}

} // namespace csa::ast
