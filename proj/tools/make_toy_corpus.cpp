// Generates the committed toy corpus: small synthetic python functions with
// aligned natural-language summaries, parsed through the normal ingestion
// pipeline (parse -> subtoken chains -> truncation).

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "csa/ast.hpp"
#include "csa/parse.hpp"
#include "csa/rng.hpp"

using namespace csa;

namespace {

const char* kNouns[] = {"value",     "item",      "total",     "score",     "weight",   "price",
                        "index",     "count",     "name",      "size",      "length",   "width",
                        "depth",     "level",     "rate",      "amount",    "offset",   "buffer",
                        "token",     "node",      "edge",      "label",     "key",      "entry",
                        "record",    "bucket",    "limit",     "budget",    "balance",  "segment"};
const char* kCompound[] = {"config_option", "user_name",  "file_path",   "item_count", "base_price",
                           "max_value",     "node_label", "edge_weight", "error_rate", "cache_size",
                           "retry_limit",   "start_index"};
const char* kVerbs[] = {"add", "merge", "combine", "join", "multiply", "subtract", "divide", "mix"};

struct Generated {
    std::string code;
    std::string summary;
};

std::string spaced(const std::string& snake) {
    std::string out;
    for (char c : snake) out.push_back(c == '_' ? ' ' : c);
    return out;
}

class Generator {
  public:
    explicit Generator(uint64_t seed) : rng_(seed) {}

    Generated next(int template_id) {
        switch (template_id % 12) {
            case 0: return getter();
            case 1: return setter();
            case 2: return arithmetic();
            case 3: return accumulate();
            case 4: return count_if();
            case 5: return find_best();
            case 6: return guard();
            case 7: return clamp();
            case 8: return recursive();
            case 9: return scan();
            case 10: return average();
            default: return build_map();
        }
    }

  private:
    Rng rng_;

    std::string noun() {
        if (rng_.uniform() < 0.35) return kCompound[rng_.below(std::size(kCompound))];
        return kNouns[rng_.below(std::size(kNouns))];
    }
    std::string plain_noun() { return kNouns[rng_.below(std::size(kNouns))]; }
    std::string verb() { return kVerbs[rng_.below(std::size(kVerbs))]; }
    int small_int() { return 1 + static_cast<int>(rng_.below(40)); }
    // occasional extra no-op statement shifts pre-order positions around
    std::string filler(const std::string& indent) {
        switch (rng_.below(4)) {
            case 0: return indent + "flag = True\n";
            case 1: return indent + "steps = " + std::to_string(small_int()) + "\n";
            case 2: return indent + "log(" + std::to_string(small_int()) + ")\n";
            default: return "";
        }
    }

    Generated getter() {
        std::string n = noun();
        Generated g;
        g.code = "def get_" + n + "(self):\n" + filler("    ") + "    return self._" + n + "\n";
        g.summary = "returns the " + spaced(n) + " of this object";
        return g;
    }

    Generated setter() {
        std::string n = noun();
        Generated g;
        g.code = "def set_" + n + "(self, value):\n" + filler("    ") + "    self._" + n + " = value\n";
        g.summary = "sets the " + spaced(n) + " to the given value";
        return g;
    }

    Generated arithmetic() {
        std::string v = verb(), n = plain_noun();
        const char* ops[] = {"+", "-", "*"};
        const char* words[] = {"sum", "difference", "product"};
        size_t pick = rng_.below(3);
        Generated g;
        g.code = "def " + v + "_" + n + "s(first, second):\n" + filler("    ") + "    return first " + ops[pick] +
                 " second\n";
        g.summary = "computes the " + std::string(words[pick]) + " of two " + n + " arguments";
        return g;
    }

    Generated accumulate() {
        std::string n = noun();
        Generated g;
        g.code = "def total_" + n + "(items):\n    result = 0\n    for item in items:\n        result = result + item." +
                 n + "\n" + filler("    ") + "    return result\n";
        g.summary = "sums the " + spaced(n) + " over all items";
        return g;
    }

    Generated count_if() {
        std::string n = plain_noun();
        int k = small_int();
        Generated g;
        g.code = "def count_big_" + n + "(values):\n    count = 0\n    for v in values:\n        if v > " +
                 std::to_string(k) + ":\n            count = count + 1\n    return count\n";
        g.summary = "counts " + n + " values greater than " + std::to_string(k);
        return g;
    }

    Generated find_best() {
        std::string n = plain_noun();
        bool largest = rng_.uniform() < 0.5;
        Generated g;
        g.code = std::string("def find_") + (largest ? "largest" : "smallest") + "_" + n +
                 "(values):\n    best = values[0]\n    for v in values:\n        if v " + (largest ? ">" : "<") +
                 " best:\n            best = v\n    return best\n";
        g.summary = std::string("finds the ") + (largest ? "largest" : "smallest") + " " + n + " in the list";
        return g;
    }

    Generated guard() {
        std::string n = noun();
        Generated g;
        g.code = "def check_" + n + "(value):\n    if value == None:\n        return False\n" + filler("    ") +
                 "    return True\n";
        g.summary = "checks whether the " + spaced(n) + " is present";
        return g;
    }

    Generated clamp() {
        std::string n = plain_noun();
        Generated g;
        g.code = "def clamp_" + n +
                 "(value, low, high):\n    if value < low:\n        return low\n    if value > high:\n        "
                 "return high\n    return value\n";
        g.summary = "clamps the " + n + " between the low and high bounds";
        return g;
    }

    Generated recursive() {
        std::string n = plain_noun();
        Generated g;
        g.code = "def shrink_" + n + "(n):\n    if n <= 1:\n        return 1\n    return n * shrink_" + n +
                 "(n - 1)\n";
        g.summary = "multiplies the " + n + " down recursively until one";
        return g;
    }

    Generated scan() {
        std::string n = plain_noun();
        Generated g;
        g.code = "def contains_" + n +
                 "(values, target):\n    for v in values:\n        if v == target:\n            return True\n    "
                 "return False\n";
        g.summary = "returns true when the target " + n + " exists in the list";
        return g;
    }

    Generated average() {
        std::string n = plain_noun();
        Generated g;
        g.code = "def average_" + n +
                 "(values):\n    if len(values) == 0:\n        return 0\n    total = 0\n    for v in values:\n   "
                 "     total = total + v\n    return total / len(values)\n";
        g.summary = "averages the " + n + " values with an empty guard";
        return g;
    }

    Generated build_map() {
        std::string n = plain_noun();
        Generated g;
        g.code = "def build_" + n +
                 "_map(keys, values):\n    result = {}\n    i = 0\n    while i < len(keys):\n        result[keys[i]] "
                 "= values[i]\n        i = i + 1\n    return result\n";
        g.summary = "builds a map from " + n + " keys to their values";
        return g;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toy corpus generator"};
    int count = 500;
    uint64_t seed = 7;
    std::string out = "data/toy_corpus.jsonl";
    app.add_option("--count", count);
    app.add_option("--seed", seed);
    app.add_option("--out", out);
    CLI11_PARSE(app, argc, argv);

    Generator gen(seed);
    Rng shuffle_rng = derive_rng(seed, "toy.templates");
    std::vector<ast::DatasetRecord> records;
    std::set<std::string> seen;
    int attempts = 0;
    while (static_cast<int>(records.size()) < count && attempts < count * 20) {
        ++attempts;
        Generated g = gen.next(static_cast<int>(shuffle_rng.below(12)));
        if (!seen.insert(g.code).second) continue; // keep every record distinct
        try {
            ast::DatasetRecord rec;
            rec.ast = ast::parse_python(g.code, "toy" + std::to_string(records.size()));
            rec.ast = ast::truncate(ast::attach_subtokens(rec.ast), 150);
            rec.summary_tokens = ast::tokenize_summary(g.summary);
            records.push_back(std::move(rec));
        } catch (const Error& e) {
            std::cerr << "generator produced unparseable code: " << e.what() << "\n" << g.code;
            return 1;
        }
    }
    if (static_cast<int>(records.size()) < count) {
        std::cerr << "only " << records.size() << " distinct records possible\n";
        return 1;
    }
    ast::save_jsonl(records, out);
    long nodes = 0;
    for (const auto& rec : records) nodes += rec.ast.size();
    std::cerr << "wrote " << records.size() << " records to " << out << " (mean nodes "
              << nodes / static_cast<double>(records.size()) << ")\n";
    return 0;
}
