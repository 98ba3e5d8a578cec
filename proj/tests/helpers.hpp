#pragma once

// Shared fixtures and brute-force oracles for the test suites. Oracles are
// deliberately written along different routes than the library code.

#include <functional>
#include <map>
#include <vector>

#include "csa/ast.hpp"
#include "csa/relations.hpp"
#include "csa/rng.hpp"

namespace helpers {

// Build an Ast from a pre-order-consistent parent array (parents[0] == -1).
inline csa::ast::Ast make_tree(const std::vector<int>& parents) {
    csa::ast::Ast tree;
    tree.nodes.resize(parents.size());
    for (size_t i = 0; i < parents.size(); ++i) {
        tree.nodes[i].id = static_cast<int>(i);
        tree.nodes[i].node_type = "n" + std::to_string(i);
        if (parents[i] >= 0) {
            tree.nodes[i].parent = parents[i];
            tree.nodes[i].child_index = static_cast<int>(tree.nodes[parents[i]].children.size());
            tree.nodes[parents[i]].children.push_back(static_cast<int>(i));
        }
    }
    return tree;
}

// Random tree with pre-order ids: the parent of node i is drawn from the
// root-to-(i-1) path, which is exactly the set of legal pre-order parents.
inline csa::ast::Ast random_tree(csa::Rng& rng, int n, double deep_bias = 0.5) {
    std::vector<int> parents(n, -1);
    std::vector<int> path{0};
    for (int i = 1; i < n; ++i) {
        size_t at;
        if (rng.uniform() < deep_bias) at = path.size() - 1;
        else at = rng.below(path.size());
        parents[i] = path[at];
        path.resize(at + 1);
        path.push_back(i);
    }
    auto tree = make_tree(parents);
    // a few distinct node types so vocabularies are nontrivial
    for (int i = 0; i < n; ++i) tree.nodes[i].node_type = "t" + std::to_string(rng.below(12));
    return tree;
}

// Oracle: for every ordered pair walk the ancestor chain.
inline csa::rel::IntMat oracle_parent_child(const csa::ast::Ast& tree) {
    const int n = tree.size();
    csa::rel::IntMat out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int cur = j, dist = 0;
            while (tree.nodes[cur].parent) {
                cur = *tree.nodes[cur].parent;
                ++dist;
                if (cur == i) {
                    out.at(i, j) = dist;
                    break;
                }
            }
            if (out.at(i, j) == 0) {
                cur = i;
                dist = 0;
                while (tree.nodes[cur].parent) {
                    cur = *tree.nodes[cur].parent;
                    ++dist;
                    if (cur == j) {
                        out.at(i, j) = -dist;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

// Oracle: compare parents, then scan the shared child list for positions.
inline csa::rel::IntMat oracle_sibling(const csa::ast::Ast& tree) {
    const int n = tree.size();
    csa::rel::IntMat out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || !tree.nodes[i].parent || !tree.nodes[j].parent) continue;
            if (*tree.nodes[i].parent != *tree.nodes[j].parent) continue;
            const auto& sibs = tree.nodes[*tree.nodes[i].parent].children;
            int pi = -1, pj = -1;
            for (size_t c = 0; c < sibs.size(); ++c) {
                if (sibs[c] == i) pi = static_cast<int>(c);
                if (sibs[c] == j) pj = static_cast<int>(c);
            }
            out.at(i, j) = pj - pi;
        }
    }
    return out;
}

// Oracle: depth-first enumeration of all descendants exactly k+1 hops away.
inline std::vector<std::vector<int>> oracle_paths(const csa::ast::Ast& tree, int k) {
    std::vector<std::vector<int>> out;
    std::function<void(int, std::vector<int>&)> walk = [&](int v, std::vector<int>& chain) {
        chain.push_back(v);
        if (static_cast<int>(chain.size()) == k + 2) {
            out.push_back(chain);
        } else {
            for (int c : tree.nodes[v].children) walk(c, chain);
        }
        chain.pop_back();
    };
    for (int start = 0; start < tree.size(); ++start) {
        std::vector<int> chain;
        walk(start, chain);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.front() != b.front() ? a.front() < b.front() : a.back() < b.back();
    });
    return out;
}

// Memoized recursive LCS, the independent route against the DP.
inline int lcs_recursive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::pair<size_t, size_t>, int> memo;
    std::function<int(size_t, size_t)> go = [&](size_t i, size_t j) -> int {
        if (i == a.size() || j == b.size()) return 0;
        auto key = std::make_pair(i, j);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        int best;
        if (a[i] == b[j]) best = 1 + go(i + 1, j + 1);
        else best = std::max(go(i + 1, j), go(i, j + 1));
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

} // namespace helpers
